// Copyright 2026 The tim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "tim/harness/scenario.hpp"

#include <map>
#include <memory>
#include <sstream>

#include "tim/crypto/hash.hpp"
#include "tim/file_io.hpp"
#include "tim/harness/world.hpp"
#include "tim/pal/envelope.hpp"

namespace tim::harness {

namespace {

namespace fld = pal::field;
using Args = std::vector<std::string>;

proxy::Module module_arg(const std::string& name) {
  if (name == "pal") return proxy::Module::pal;
  if (name == "flicker") return proxy::Module::flicker;
  if (name == "proxy") return proxy::Module::proxy;
  throw ScenarioInvalid("unknown module '" + name + "'");
}

pal::PalOption option_arg(const std::string& name) {
  for (std::uint8_t i = 1; i <= 6; ++i) {
    auto o = static_cast<pal::PalOption>(i);
    if (pal::option_name(o) == name) return o;
  }
  throw ScenarioInvalid("unknown PAL option '" + name + "'");
}

proxy::PageKind page_kind_arg(const std::string& name) {
  auto k = proxy::page_kind_from_name(name);
  if (!k) throw ScenarioInvalid("unknown page kind '" + name + "'");
  return *k;
}

client::Client& client_arg(World& w, const std::string& name) {
  if (!w.has_client(name)) throw ScenarioInvalid("no client '" + name + "'");
  return w.client(name);
}

TargetSite& site_arg(World& w, const std::string& name) {
  if (!w.has_site(name)) throw ScenarioInvalid("no site '" + name + "'");
  return w.site(name);
}

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailed(what);
}

Fields credentials(const std::string& username, const std::string& password) {
  Fields f;
  f.set("username", username);
  f.set("password", password);
  return f;
}

void expect_status(const std::optional<Fields>& result, std::string_view want) {
  expect(result.has_value(), "nothing was sent");
  expect(result->get_string("status") == want, "proxy answered '" + result->get_string("status") + "'");
}

// Rewrites the envelope in `path` once, the first time `option` passes by
// and `edit` returns true.
proxy::Flicker::FileHook envelope_editor(pal::PalOption option, std::function<bool(pal::PalEnvelope&)> edit) {
  auto fired = std::make_shared<bool>(false);
  return [option, edit = std::move(edit), fired](const std::filesystem::path& path) {
    if (*fired) return;
    pal::PalEnvelope env = pal::PalEnvelope::decode(read_file(path));
    if (env.option != option || !edit(env)) return;
    *fired = true;
    write_file_atomic(path, env.encode());
  };
}

void flip_sealed_blob(pal::PalEnvelope& env, std::string_view field) {
  tpm::SealedBlob blob = tpm::SealedBlob::decode(env.payload.get(field));
  blob.ciphertext.back() ^= 0x01;
  env.payload.set(std::string(field), blob.encode());
}

std::vector<Primitive> make_primitives() {
  std::vector<Primitive> p;
  auto add = [&p](std::string name, std::size_t arity, std::string usage,
                  std::function<void(World&, const Args&)> run) {
    p.push_back({std::move(name), arity, std::move(usage), std::move(run)});
  };

  // Platform and artifacts.
  add("boot", 0, "boot", [](World& w, const Args&) { w.boot(); });
  add("reboot", 0, "reboot", [](World& w, const Args&) { w.reboot(); });
  add("tamper", 1, "tamper <pal|flicker|proxy>", [](World& w, const Args& a) {
    proxy::Module m = module_arg(a[0]);
    Bytes image = w.artifacts().get(m);
    const std::string patch = "patched=1\n";
    image.insert(image.end(), patch.begin(), patch.end());
    w.artifacts().set(m, std::move(image));
  });
  add("advance-clock", 1, "advance-clock <seconds>", [](World& w, const Args& a) {
    try {
      w.advance_clock(std::stoll(a[0]));
    } catch (const std::logic_error&) {
      throw ScenarioInvalid("bad number '" + a[0] + "'");
    }
  });

  // Sites and clients.
  auto add_site = [](World& w, const Args& a, bool forged) {
    TargetSite& s = w.add_site(a[0], forged);
    s.add_account(a[1], a[2]);
    w.leaks().add_secret(a[0] + " username", a[1]);
    w.leaks().add_secret(a[0] + " password", a[2]);
  };
  add("add-site", 3, "add-site <id> <username> <password>",
      [add_site](World& w, const Args& a) { add_site(w, a, false); });
  add("add-forged-site", 3, "add-forged-site <id> <username> <password>",
      [add_site](World& w, const Args& a) { add_site(w, a, true); });
  add("take-site-down", 1, "take-site-down <id>", [](World& w, const Args& a) {
    site_arg(w, a[0]);
    w.take_site_down(a[0]);
  });
  add("add-client", 2, "add-client <name> <user-id>",
      [](World& w, const Args& a) { w.add_client(a[0], a[1]); });

  // Honest protocol runs.
  add("register", 3, "register <client> <master-password> <secret-phrase>", [](World& w, const Args& a) {
    client::Client& c = client_arg(w, a[0]);
    w.leaks().add_secret(a[0] + " master password", a[1]);
    w.leaks().add_secret(a[0] + " secret phrase", a[2]);
    c.register_user(a[1], a[2]);
    std::vector<std::string> list = c.otp_list(a[2]);
    for (std::size_t i = 0; i < list.size(); ++i) w.leaks().add_secret(a[0] + " otp " + std::to_string(i), list[i]);
  });
  add("login", 2, "login <client> <master-password>", [](World& w, const Args& a) {
    w.leaks().add_secret(a[0] + " login password", a[1]);
    client_arg(w, a[0]).authenticate(a[1], pal::PasswordKind::master);
  });
  add("login-otp", 2, "login-otp <client> <secret-phrase>",
      [](World& w, const Args& a) { client_arg(w, a[0]).authenticate_with_otp(a[1]); });
  add("visit", 3, "visit <client> <site> <login|update|other>", [](World& w, const Args& a) {
    client_arg(w, a[0]).visit(a[1], page_kind_arg(a[2]));
  });
  add("enroll", 4, "enroll <client> <site> <username> <password>", [](World& w, const Args& a) {
    client::Client& c = client_arg(w, a[0]);
    w.leaks().add_secret(a[1] + " username", a[2]);
    w.leaks().add_secret(a[1] + " password", a[3]);
    client::RenderedPage page = c.visit(a[1], proxy::PageKind::login);
    expect(page.mode == proxy::RenderMode::enroll, "login page not rendered for enrollment");
    expect_status(c.enroll(page, credentials(a[2], a[3])), "authenticated");
  });
  add("submit", 2, "submit <client> <site>", [](World& w, const Args& a) {
    client::Client& c = client_arg(w, a[0]);
    client::RenderedPage page = c.visit(a[1], proxy::PageKind::login);
    expect(page.mode == proxy::RenderMode::submit, "login page not rendered with dummies");
    expect_status(c.submit_dummy_page(page), "authenticated");
  });
  add("update", 4, "update <client> <site> <new-username> <new-password>", [](World& w, const Args& a) {
    client::Client& c = client_arg(w, a[0]);
    w.leaks().add_secret(a[1] + " new username", a[2]);
    w.leaks().add_secret(a[1] + " new password", a[3]);
    client::RenderedPage page = c.visit(a[1], proxy::PageKind::update);
    expect(page.mode == proxy::RenderMode::update, "update page not rendered with dummies");
    expect_status(c.update(page, credentials(a[2], a[3])), "updated");
  });

  // Expectations.
  add("expect-records", 1, "expect-records <n>", [](World& w, const Args& a) {
    const std::size_t n = w.genuine_proxy().database().records().size();
    expect(std::to_string(n) == a[0], "database holds " + std::to_string(n) + " records");
  });
  add("expect-site-user", 2, "expect-site-user <site> <username>", [](World& w, const Args& a) {
    auto last = site_arg(w, a[0]).last_login();
    expect(last && *last == a[1], "site " + a[0] + " did not log in the expected user");
  });

  // Attacks.
  add("forge-pcr15", 0, "forge-pcr15", [](World& w, const Args&) {
    crypto::KeyPair own = crypto::generate_keypair(crypto::KeyPurpose::proxy, w.attacker_rng());
    w.tpm().extend(tpm::kProxyKeyPcr, "pm-pub", crypto::hash(own.public_key().encode()));
    Fields in;
    in.set(std::string(fld::kPmPub), own.public_key().encode());
    proxy::FlickerResult r =
        w.genuine_proxy().flicker().invoke(pal::PalEnvelope::request(pal::PalOption::initial_sealing, in));
    if (!r.output.ok()) throw r.output.error();
    throw CheckFailed("the PAL sealed an attacker key");
  });
  add("mutate-pal-input", 2, "mutate-pal-input <pal-option> <sealed-field>", [](World& w, const Args& a) {
    pal::PalOption option = option_arg(a[0]);
    std::string field = a[1];
    w.genuine_proxy().flicker().set_input_hook(envelope_editor(option, [field](pal::PalEnvelope& env) {
      if (!env.payload.has(field)) return false;
      flip_sealed_blob(env, field);
      return true;
    }));
  });
  add("flip-auth-verdict", 0, "flip-auth-verdict", [](World& w, const Args&) {
    w.genuine_proxy().flicker().set_output_hook(
        envelope_editor(pal::PalOption::authentication, [](pal::PalEnvelope& env) {
          if (!env.ok()) return false;
          Bytes v = env.payload.get(fld::kVerdict);
          if (v.size() != 1) return false;
          v[0] ^= 0x01;
          env.payload.set(std::string(fld::kVerdict), v);
          return true;
        }));
  });
  add("replay-pal-output", 0, "replay-pal-output", [](World& w, const Args&) {
    auto recorded = std::make_shared<std::optional<Bytes>>();
    auto fired = std::make_shared<bool>(false);
    w.genuine_proxy().flicker().set_output_hook([recorded, fired](const std::filesystem::path& path) {
      Bytes file = read_file(path);
      pal::PalEnvelope env = pal::PalEnvelope::decode(file);
      if (env.option != pal::PalOption::credential_decryption || !env.ok() || *fired) return;
      if (!*recorded) {
        *recorded = std::move(file);
        return;
      }
      *fired = true;
      write_file_atomic(path, **recorded);
    });
  });
  add("replay-tunnel-offer", 0, "replay-tunnel-offer", [](World& w, const Args&) {
    auto recorded = std::make_shared<std::optional<Bytes>>();
    w.network().add_tap([recorded](TapContext& ctx) {
      if (ctx.direction != Direction::reply || ctx.frame.kind != wire::kind::kTunnelOffer) return;
      if (!*recorded) {
        *recorded = ctx.frame.body;
      } else {
        ctx.frame.body = **recorded;
      }
    });
  });
  add("substitute-tunnel-key", 0, "substitute-tunnel-key", [](World& w, const Args&) {
    auto key = std::make_shared<crypto::KeyPair>(crypto::generate_keypair(crypto::KeyPurpose::pal, w.attacker_rng()));
    w.network().add_tap([key](TapContext& ctx) {
      if (ctx.direction != Direction::reply || ctx.frame.kind != wire::kind::kTunnelOffer) return;
      Fields body = ctx.frame.fields();
      body.set("pal_pub", key->public_key().encode());
      ctx.frame.body = body.encode();
    });
  });
  add("replay-frame", 1, "replay-frame <kind>", [](World& w, const Args& a) {
    std::optional<wire::Frame> last;
    for (const auto& e : w.network().transcript())
      if (e.direction == Direction::request && !e.injected && e.frame.kind == a[0]) last = e.frame;
    if (!last) throw ScenarioInvalid("no " + a[0] + " frame to replay");
    wire::Frame reply = w.network().inject(*last);
    if (reply.kind == wire::kind::kError) throw wire::error_from_body(reply.fields());
    throw CheckFailed("replayed " + a[0] + " was accepted");
  });
  add("reuse-otp", 3, "reuse-otp <attacker-client> <victim-client> <secret-phrase>", [](World& w, const Args& a) {
    client::Client& attacker = client_arg(w, a[0]);
    const client::ClientProfile& victim = client_arg(w, a[1]).profile();
    if (!victim.otp_params || victim.otp_cursor == 0) throw ScenarioInvalid(a[1] + " has not used an OTP yet");
    std::vector<Digest> chain = otp::derive_chain(a[2], *victim.otp_params);
    attacker.authenticate(otp::format_password(chain[victim.otp_cursor - 1]), pal::PasswordKind::otp);
  });
  add("malicious-copy", 0, "malicious-copy", [](World& w, const Args&) { w.start_malicious_copy(); });
  return p;
}

const Primitive* find_primitive(std::string_view name) {
  for (const auto& p : primitives())
    if (p.name == name) return &p;
  return nullptr;
}

Scenario make(std::string name, std::string description, Outcome expected, std::string step, std::string_view script,
              bool attack = true) {
  return {std::move(name), std::move(description), expected, std::move(step), parse_script(script), attack};
}

// Shared prefixes of the builtin scripts.
constexpr std::string_view kSetup = R"(
boot
add-site shop alice.shop shop-pw-7f3a
add-client alice alice
register alice master-pw-c41d phrase-orchid-lantern
)";

constexpr std::string_view kEnrolled = R"(
boot
add-site shop alice.shop shop-pw-7f3a
add-client alice alice
register alice master-pw-c41d phrase-orchid-lantern
login alice master-pw-c41d
enroll alice shop alice.shop shop-pw-7f3a
)";

std::string cat(std::string_view a, std::string_view b) { return std::string(a) + std::string(b); }

}  // namespace

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::flow_succeeds: return "flow_succeeds";
    case Outcome::detected_at_boot: return "detected_at_boot";
    case Outcome::attestation_failure: return "attestation_failure";
    case Outcome::seal_violation: return "seal_violation";
    case Outcome::replay_rejected: return "replay_rejected";
    case Outcome::tunnel_refused: return "tunnel_refused";
    case Outcome::certificate_rejected: return "certificate_rejected";
    case Outcome::credential_access_denied: return "credential_access_denied";
    case Outcome::key_provenance_rejected: return "key_provenance_rejected";
    case Outcome::authentication_refused: return "authentication_refused";
    case Outcome::other_error: return "other_error";
    case Outcome::check_failed: return "check_failed";
  }
  return "other_error";
}

std::optional<Outcome> outcome_from_name(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Outcome::check_failed); ++i)
    if (outcome_name(static_cast<Outcome>(i)) == name) return static_cast<Outcome>(i);
  return std::nullopt;
}

Outcome classify(Errc code) noexcept {
  switch (code) {
    case Errc::boot_refused: return Outcome::detected_at_boot;
    case Errc::attestation_failure: return Outcome::attestation_failure;
    case Errc::seal_violation:
    case Errc::integrity_failure:
    case Errc::unknown_blob: return Outcome::seal_violation;
    case Errc::replay: return Outcome::replay_rejected;
    case Errc::tunnel_refused: return Outcome::tunnel_refused;
    case Errc::certificate_rejected: return Outcome::certificate_rejected;
    case Errc::credential_access_denied: return Outcome::credential_access_denied;
    case Errc::key_provenance: return Outcome::key_provenance_rejected;
    case Errc::authentication_refused: return Outcome::authentication_refused;
    default: return Outcome::other_error;
  }
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::passed: return "PASS";
    case Verdict::failed: return "FAIL";
    case Verdict::invalid: return "INVALID";
  }
  return "INVALID";
}

std::vector<ScriptStep> parse_script(std::string_view text) {
  std::vector<ScriptStep> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    ScriptStep step;
    step.line = n;
    if (!(words >> step.primitive)) continue;
    for (std::string w; words >> w;) step.args.push_back(w);
    const Primitive* p = find_primitive(step.primitive);
    if (!p) throw ScenarioInvalid("line " + std::to_string(n) + ": unknown primitive '" + step.primitive + "'");
    if (p->arity != step.args.size())
      throw ScenarioInvalid("line " + std::to_string(n) + ": usage: " + p->usage);
    steps.push_back(std::move(step));
  }
  return steps;
}

const std::vector<Primitive>& primitives() {
  static const std::vector<Primitive> kPrimitives = make_primitives();
  return kPrimitives;
}

Report run_scenario(const Scenario& scenario, std::uint64_t seed) {
  World world(seed);
  return run_scenario(scenario, world);
}

Report run_scenario(const Scenario& scenario, World& world) {
  Report report;
  report.scenario = scenario.name;
  report.expected = scenario.expected;
  report.expected_step = scenario.expected_step;

  bool invalid = false;
  for (std::size_t i = 0; i < scenario.script.size() && !invalid; ++i) {
    const ScriptStep& step = scenario.script[i];
    const Primitive* p = find_primitive(step.primitive);
    auto detected = [&](Outcome o, std::string label, std::string detail) {
      report.observed = o;
      report.step = std::move(label);
      report.detail = std::move(detail);
      report.script_index = i;
      if (std::size_t n = world.network().transcript_size(); n > 0) report.frame_index = n - 1;
    };
    try {
      if (!p || p->arity != step.args.size()) throw ScenarioInvalid("bad step '" + step.primitive + "'");
      p->run(world, step.args);
      continue;
    } catch (const ScenarioInvalid& e) {
      invalid = true;
      report.detail = std::string("line ") + std::to_string(step.line) + ": " + e.what();
      report.script_index = i;
    } catch (const CheckFailed& e) {
      detected(Outcome::check_failed, step.primitive, e.what());
    } catch (const TimError& e) {
      detected(classify(e.code()), e.step(), std::string(errc_name(e.code())) + ": " + e.what());
    }
    break;
  }

  world.final_leak_scan();
  report.transcript = world.network().transcript();
  report.pcr_history = world.pcr_history();
  report.leaks = world.leaks().findings();
  report.stored_records = world.genuine_proxy().database().records().size();
  if (invalid) {
    report.verdict = Verdict::invalid;
  } else {
    const bool ok = report.observed == report.expected && report.step == report.expected_step && report.leaks.empty();
    report.verdict = ok ? Verdict::passed : Verdict::failed;
  }
  return report;
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> s;
  s.push_back(make("honest-end-to-end", "register, log in with master and OTP, enroll at two sites, submit, update",
                   Outcome::flow_succeeds, "", R"(
boot
add-site shop alice.shop shop-pw-7f3a
add-site mail alice.mail mail-pw-91c2
add-client alice alice
register alice master-pw-c41d phrase-orchid-lantern
login alice master-pw-c41d
login-otp alice phrase-orchid-lantern
enroll alice shop alice.shop shop-pw-7f3a
enroll alice mail alice.mail mail-pw-91c2
submit alice shop
update alice shop alice.shop shop-pw-new-22b8
submit alice shop
submit alice mail
expect-site-user shop alice.shop
expect-records 2
)",
                   false));
  s.push_back(make("tamper-proxy-pre-boot", "proxy module image modified on disk before boot",
                   Outcome::detected_at_boot, "boot.measure", "tamper proxy\nboot\n"));
  s.push_back(make("tamper-proxy-post-boot", "proxy module replaced while running; next tunnel fails attestation",
                   Outcome::attestation_failure, "secure-tunnel.6a",
                   "boot\nadd-client alice alice\ntamper proxy\nregister alice master-pw-c41d phrase-orchid-lantern\n"));
  s.push_back(make("tamper-flicker-pre-boot", "Flicker image modified on disk before boot",
                   Outcome::detected_at_boot, "boot.measure", "tamper flicker\nboot\n"));
  s.push_back(make("tamper-flicker-post-boot", "Flicker replaced after enrollment; sealed proxy key no longer unseals",
                   Outcome::seal_violation, "credential-decryption.3a",
                   cat(kEnrolled, "tamper flicker\nsubmit alice shop\n")));
  s.push_back(make("tamper-pal", "PAL replaced after initial sealing; PCR18 no longer matches the seal",
                   Outcome::seal_violation, "credential-decryption.3a",
                   cat(kEnrolled, "tamper pal\nsubmit alice shop\n")));
  s.push_back(make("tamper-pal-pre-boot", "PAL image modified before boot; rejected during initial sealing",
                   Outcome::detected_at_boot, "initial-sealing.1c", "tamper pal\nboot\n"));
  s.push_back(make("forge-pcr15", "attacker extends PCR15 with its own key and asks the PAL to seal it",
                   Outcome::key_provenance_rejected, "initial-sealing.3b", "boot\nforge-pcr15\n"));
  s.push_back(make("mutate-pal-input", "sealed PAL key in the input envelope altered on its way to the PAL",
                   Outcome::seal_violation, "credential-decryption.3b",
                   cat(kEnrolled, "mutate-pal-input credential_decryption sealed_pal_priv\nsubmit alice shop\n")));
  s.push_back(make("mutate-pal-output", "failed authentication verdict flipped in the output envelope",
                   Outcome::attestation_failure, "authentication.6a",
                   cat(kSetup, "flip-auth-verdict\nlogin alice wrong-password\n")));
  s.push_back(make("replay-auth-quote", "tunnel offer with an old quote replayed to the client",
                   Outcome::replay_rejected, "secure-tunnel.6a",
                   "boot\nadd-client alice alice\nreplay-tunnel-offer\n"
                   "register alice master-pw-c41d phrase-orchid-lantern\nlogin alice master-pw-c41d\n"));
  s.push_back(make("replay-encrypted-credentials", "recorded enrollment frame with encrypted credentials replayed",
                   Outcome::replay_rejected, "enrollment.10a", cat(kEnrolled, "replay-frame page.enroll\n")));
  s.push_back(make("replay-pal-output", "old credential-decryption output substituted for a fresh one",
                   Outcome::replay_rejected, "credential-decryption.5b",
                   cat(kSetup, "login alice master-pw-c41d\nreplay-pal-output\n"
                               "enroll alice shop alice.shop shop-pw-7f3a\nsubmit alice shop\n")));
  s.push_back(make("forge-target-certificate", "target presents a certificate from an untrusted issuer",
                   Outcome::certificate_rejected, "enrollment.4a", R"(
boot
add-forged-site shop alice.shop shop-pw-7f3a
add-client alice alice
register alice master-pw-c41d phrase-orchid-lantern
login alice master-pw-c41d
enroll alice shop alice.shop shop-pw-7f3a
)"));
  s.push_back(make("otp-from-untrusted-client", "OTP observed on an untrusted machine and used again",
                   Outcome::replay_rejected, "authentication.4b",
                   cat(kSetup, "add-client mallory alice\nlogin-otp alice phrase-orchid-lantern\n"
                               "reuse-otp mallory alice phrase-orchid-lantern\n")));
  s.push_back(make("malicious-copy-of-proxy", "copy of the proxy with its own key takes over the database",
                   Outcome::credential_access_denied, "credential-decryption.5a",
                   cat(kEnrolled, "malicious-copy\nsubmit alice shop\n")));
  s.push_back(make("substitute-tunnel-key", "proxy swaps the PAL key in the tunnel offer for its own",
                   Outcome::tunnel_refused, "secure-tunnel.6a",
                   "boot\nadd-client alice alice\nsubstitute-tunnel-key\n"
                   "register alice master-pw-c41d phrase-orchid-lantern\n"));
  return s;
}

std::optional<Scenario> find_builtin(std::string_view name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  return std::nullopt;
}

RecordedRun to_recorded_run(const Report& report) {
  return {report.scenario, std::string(outcome_name(report.observed)), report.step, report.transcript};
}

}  // namespace tim::harness
