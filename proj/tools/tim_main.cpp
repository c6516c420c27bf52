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
// tim: scenario runner, honest-flow demo and command-line client.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tim/error.hpp"
#include "tim/file_io.hpp"
#include "tim/harness/deployment.hpp"
#include "tim/harness/scenario.hpp"
#include "tim/harness/world.hpp"

namespace {

using namespace tim;
using namespace tim::harness;

int cmd_list() {
  for (const auto& s : builtin_scenarios()) {
    std::printf("%-30s %-26s %-26s %s\n", s.name.c_str(), std::string(outcome_name(s.expected)).c_str(),
                s.expected_step.empty() ? "-" : s.expected_step.c_str(), s.description.c_str());
  }
  return 0;
}

void print_report(const Report& r, bool verbose) {
  std::printf("%-7s %-30s %-26s %s\n", std::string(verdict_name(r.verdict)).c_str(), r.scenario.c_str(),
              std::string(outcome_name(r.observed)).c_str(), r.step.empty() ? "-" : r.step.c_str());
  if (r.verdict != Verdict::passed || verbose) {
    std::printf("        expected %s at %s\n", std::string(outcome_name(r.expected)).c_str(),
                r.expected_step.empty() ? "-" : r.expected_step.c_str());
    if (!r.detail.empty()) std::printf("        detail: %s\n", r.detail.c_str());
    if (r.frame_index) std::printf("        detected after frame %zu of %zu\n", *r.frame_index, r.transcript.size());
    for (const auto& leak : r.leaks) std::printf("        LEAK %s in %s\n", leak.secret.c_str(), leak.location.c_str());
  }
}

int cmd_run(const std::string& name, std::uint64_t seed, const std::string& transcript_path, bool verbose) {
  std::vector<Scenario> selected;
  if (name == "all") {
    selected = builtin_scenarios();
  } else if (auto s = find_builtin(name)) {
    selected.push_back(*s);
  } else {
    std::fprintf(stderr, "unknown scenario '%s' (see 'tim list')\n", name.c_str());
    return 2;
  }
  std::vector<RecordedRun> runs;
  int failures = 0;
  for (const auto& s : selected) {
    Report r = run_scenario(s, seed);
    print_report(r, verbose);
    if (r.verdict != Verdict::passed) ++failures;
    runs.push_back(to_recorded_run(r));
  }
  if (!transcript_path.empty()) write_file_atomic(transcript_path, encode_transcript(runs));
  std::printf("%zu scenarios, %d not passed\n", selected.size(), failures);
  return failures == 0 ? 0 : 1;
}

int cmd_demo(std::uint64_t seed, bool pause) {
  Scenario honest = *find_builtin("honest-end-to-end");
  World world(seed);
  std::size_t frames = 0;
  std::size_t events = 0;
  for (const auto& step : honest.script) {
    std::string line = step.primitive;
    for (const auto& a : step.args) line += " " + a;
    std::printf("\n$ %s\n", line.c_str());
    for (const auto& p : primitives()) {
      if (p.name != step.primitive) continue;
      try {
        p.run(world, step.args);
      } catch (const TimError& e) {
        std::printf("  refused at %s: %s\n", e.step().c_str(), e.what());
        return 1;
      }
    }
    auto history = world.pcr_history();
    for (; events < history.size(); ++events) {
      const auto& e = history[events];
      if (e.kind == tim::tpm::PcrEvent::Kind::extend)
        std::printf("  PCR%-2u extend %-16s -> %s\n", e.pcr_index, e.label.c_str(), e.new_value.hex().c_str());
      else if (e.kind == tim::tpm::PcrEvent::Kind::drtm_reset)
        std::printf("  PCR%-2u late-launch reset\n", e.pcr_index);
    }
    auto transcript = world.network().transcript();
    for (; frames < transcript.size(); ++frames) {
      const auto& t = transcript[frames];
      std::printf("  [%-18s] %-14s -> %-14s %s\n", std::string(frame_step(t)).c_str(), t.frame.from.c_str(),
                  t.frame.to.c_str(), t.frame.kind.c_str());
    }
    if (pause) {
      std::printf("  (enter to continue)");
      std::fflush(stdout);
      std::string ignored;
      std::getline(std::cin, ignored);
    }
  }
  world.final_leak_scan();
  std::printf("\n%zu frames, %zu stored records, %zu plaintext findings\n", frames,
              world.genuine_proxy().database().records().size(), world.leaks().findings().size());
  return 0;
}

void print_fields(const client::RenderedPage& page) {
  std::printf("page %s at %s (%s)\n", std::string(tim::proxy::page_kind_name(page.kind)).c_str(), page.site.c_str(),
              std::string(tim::proxy::render_mode_name(page.mode)).c_str());
  for (const auto& [name, value] : page.fields)
    std::printf("  %-14s %s\n", name.c_str(), value.empty() ? "(empty)" : tim::to_string(value).c_str());
}

client::RenderedPage need_page(Deployment& d, tim::proxy::RenderMode mode) {
  auto page = d.last_page();
  if (!page || page->mode != mode)
    throw TimError(Errc::usage, "visit a page rendered for " + std::string(tim::proxy::render_mode_name(mode)) + " first");
  return *page;
}

Fields creds(const std::string& user, const std::string& pass) {
  Fields f;
  f.set("username", user);
  f.set("password", pass);
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tim: authentication proxy with a TPM-protected security kernel"};
  app.require_subcommand(1);

  std::string scenario;
  std::uint64_t seed = 1;
  std::string transcript;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "run a builtin scenario, or all of them");
  run->add_option("scenario", scenario, "scenario name or 'all'")->required();
  run->add_option("--seed", seed, "world seed");
  run->add_option("--transcript", transcript, "write the frame transcript here");
  run->add_flag("-v,--verbose", verbose, "print details for passing scenarios too");

  auto* list = app.add_subcommand("list", "list builtin scenarios");

  bool pause = false;
  auto* demo = app.add_subcommand("demo", "walk through the honest flow, printing every protocol step");
  demo->add_option("--seed", seed, "world seed");
  demo->add_flag("--step", pause, "wait for enter after each step");

  std::string state = ".tim";
  auto* cli = app.add_subcommand("client", "command-line client against a local deployment");
  cli->add_option("--state", state, "state directory")->capture_default_str();
  cli->require_subcommand(1);

  std::string user, master, phrase, password, site, page_kind = "login", username;
  bool use_otp = false;
  auto* c_init = cli->add_subcommand("init", "create a deployment and a client profile");
  c_init->add_option("--user", user, "user id")->required();
  c_init->add_option("--seed", seed, "seed for the CA, TPM and site keys");
  auto* c_account = cli->add_subcommand("add-account", "create an account at a target site");
  c_account->add_option("site", site)->required();
  c_account->add_option("username", username)->required();
  c_account->add_option("password", password)->required();
  auto* c_register = cli->add_subcommand("register", "register with the proxy and print the OTP list");
  c_register->add_option("--master", master, "master password")->required();
  c_register->add_option("--phrase", phrase, "secret phrase for the OTP list")->required();
  auto* c_login = cli->add_subcommand("login", "authenticate to the proxy");
  c_login->add_option("--password", password, "master password");
  c_login->add_flag("--otp", use_otp, "use the next one-time password");
  c_login->add_option("--phrase", phrase, "secret phrase (with --otp)");
  auto* c_visit = cli->add_subcommand("visit", "open a page of a target site through the proxy");
  c_visit->add_option("site", site)->required();
  c_visit->add_option("--page", page_kind, "login, update or other")->capture_default_str();
  auto* c_enroll = cli->add_subcommand("enroll", "enter credentials into the visited login page");
  c_enroll->add_option("--username", username)->required();
  c_enroll->add_option("--password", password)->required();
  auto* c_submit = cli->add_subcommand("submit", "submit the visited dummy-filled login page");
  auto* c_update = cli->add_subcommand("update", "enter new credentials into the visited update page");
  c_update->add_option("--username", username)->required();
  c_update->add_option("--password", password)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) return cmd_list();
    if (*run) return cmd_run(scenario, seed, transcript, verbose);
    if (*demo) return cmd_demo(seed, pause);
    if (*c_init) {
      Deployment::init(state, user, seed);
      std::printf("initialized %s for user %s\n", state.c_str(), user.c_str());
      return 0;
    }
    Deployment d(state);
    client::Client& c = d.client();
    if (*c_account) {
      d.site(site).add_account(username, password);
      std::printf("account %s created at %s\n", username.c_str(), site.c_str());
    } else if (*c_register) {
      tim::otp::OtpParams params = c.register_user(master, phrase);
      std::printf("registered; OTP parameters %s\n", params.to_line().c_str());
      auto otps = c.otp_list(phrase);
      for (std::size_t i = 0; i < otps.size(); ++i) std::printf("  %3zu %s\n", i + 1, otps[i].c_str());
    } else if (*c_login) {
      if (use_otp) {
        if (phrase.empty()) throw TimError(Errc::usage, "--otp needs --phrase");
        c.authenticate_with_otp(phrase);
      } else {
        if (password.empty()) throw TimError(Errc::usage, "give --password or --otp");
        c.authenticate(password, tim::pal::PasswordKind::master);
      }
      std::printf("authenticated; PAL key pinned for this session\n");
    } else if (*c_visit) {
      auto kind = tim::proxy::page_kind_from_name(page_kind);
      if (!kind) throw TimError(Errc::usage, "unknown page kind '" + page_kind + "'");
      client::RenderedPage page = c.visit(site, *kind);
      d.set_last_page(page);
      print_fields(page);
    } else if (*c_enroll) {
      auto r = c.enroll(need_page(d, tim::proxy::RenderMode::enroll), creds(username, password));
      std::printf("%s\n", r ? r->get_string("status").c_str() : "nothing to send");
    } else if (*c_submit) {
      Fields r = c.submit_dummy_page(need_page(d, tim::proxy::RenderMode::submit));
      std::printf("%s\n", r.get_string("status").c_str());
    } else if (*c_update) {
      auto r = c.update(need_page(d, tim::proxy::RenderMode::update), creds(username, password));
      std::printf("%s\n", r ? r->get_string("status").c_str() : "nothing to send");
    }
    d.save();
    return 0;
  } catch (const TimError& e) {
    std::fprintf(stderr, "error: %s", e.what());
    if (!e.step().empty()) std::fprintf(stderr, " (at %s)", e.step().c_str());
    std::fprintf(stderr, " [%s]\n", std::string(errc_name(e.code())).c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
