#include <sstream>

#include "doctest.h"
#include "lossyphase/errors.hpp"
#include "lossyphase/io.hpp"

using namespace lossyphase;

namespace {

std::string message_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in, "run.cfg");
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.14) == "-0.14");
  CHECK(format_number(1e-20) == "1e-20");
}

TEST_CASE("config parsing") {
  std::istringstream in(
      "# campaign\n"
      "eta_list = 0.2, 0.361\n"
      "probe=noon\n"
      "phases=0,0.2,-0.2\n"
      "series=100   # fewer\n"
      "events=1500\n"
      "seed=18446744073709551615\n"
      "epsilon=0.0005\n"
      "lambda_hom=0.98\n"
      "poissonize_m=false\n"
      "include_cc=no\n"
      "events_scope=per_setting\n");
  const ExperimentConfig c = parse_config(in);
  CHECK(c.eta_list == std::vector<double>{0.2, 0.361});
  CHECK(c.probe_kinds == std::vector<ProbeKind>{ProbeKind::noon});
  CHECK(c.phase_list.size() == 3);
  CHECK(c.series_count == 100);
  CHECK(c.events_per_series == 1500);
  CHECK(c.master_seed == 18446744073709551615ULL);
  CHECK(c.imperfections.epsilon == 0.0005);
  CHECK(c.imperfections.lambda_hom == 0.98);
  CHECK_FALSE(c.poissonize_m);
  CHECK_FALSE(c.include_cc);
  CHECK(c.events_scope == EventsScope::per_setting);
  CHECK(c.imperfections.v_classical == 1.0);
}

TEST_CASE("config diagnostics name the line") {
  CHECK(message_of("series=10\nevents 20\n") == "run.cfg:2: expected key=value");
  CHECK(message_of("\n\nseries=ten\n") == "run.cfg:3: expected an integer for key 'series'");
  CHECK(message_of("colour=blue\n") == "run.cfg:1: unknown key 'colour'");
  CHECK(message_of("probe=squeezed\n").find("run.cfg:1:") == 0);
  CHECK(message_of("seed=1\nseed=2\n") == "run.cfg:2: duplicate key 'seed' (first on line 1)");
  CHECK(message_of("eta_list=0.2,,0.4\n").find("run.cfg:1:") == 0);
}

TEST_CASE("config text and JSON round trips") {
  ExperimentConfig c;
  c.eta_list = {0.361};
  c.phase_list = {-0.4, 0.0, 0.4};
  c.master_seed = 77;
  c.imperfections.delta = 0.25;
  c.quarter_tuning = QuarterTuning::trimmed_phase;
  std::istringstream in(config_to_text(c));
  const ExperimentConfig back = parse_config(in);
  CHECK(config_to_text(back) == config_to_text(c));
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("dataset CSV round trip") {
  EventDataset ds;
  ds.records.push_back({0.361, ProbeKind::optimal, -0.14, Setting::quarter, 0,
                        {10, 20, 30, 0, 0, 0}, 60, 123});
  ds.records.push_back({0.361, ProbeKind::optimal, -0.14, Setting::half, 0,
                        {0, 0, 0, 5, 6, 7}, 60, 456});
  std::ostringstream out;
  write_dataset_csv(out, ds);
  CHECK(out.str() ==
        "eta,probe,phi_true,setting,series_id,n_AA,n_AB,n_BB,n_AC,n_BC,n_CC,seed_used\n"
        "0.361,optimal,-0.14,quarter,0,10,20,30,0,0,0,123\n"
        "0.361,optimal,-0.14,half,0,0,0,0,5,6,7,456\n");
  std::istringstream in(out.str());
  const EventDataset back = read_dataset_csv(in);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[1].counts == ds.records[1].counts);
  CHECK(back.records[1].seed_used == 456);
}

TEST_CASE("dataset schema errors name the column") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_dataset_csv(in, "d.csv");
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("eta,probe,phi,setting\n") == "d.csv: column 3 is 'phi', expected 'phi_true'");
  CHECK(error_of("eta,probe,phi_true\n") == "d.csv: missing column 'setting'");
  const std::string header =
      "eta,probe,phi_true,setting,series_id,n_AA,n_AB,n_BB,n_AC,n_BC,n_CC,seed_used\n";
  CHECK(error_of(header + "0.2,optimal,0,quarter,0,1,2,-3,0,0,0,9\n") ==
        "d.csv:2: invalid value '-3' in column 'n_BB'");
  CHECK(error_of(header + "0.2,squeezed,0,quarter,0,1,2,3,0,0,0,9\n") ==
        "d.csv:2: invalid value 'squeezed' in column 'probe'");
  CHECK(error_of(header + "0.2,noon,0,quarter,0,1\n") == "d.csv:2: expected 12 fields, found 6");
  CHECK(error_of(header.substr(0, header.size() - 1) + ",extra\n") ==
        "d.csv: unexpected column 'extra'");
}

TEST_CASE("table headers") {
  std::ostringstream b, r, e;
  write_bounds_csv(b, {});
  write_report_csv(r, {});
  write_estimates_csv(e, {});
  CHECK(b.str() == "eta,dphi_optimal,dphi_noon,dphi_sil,x0,x1,x2,prep_success_p\n");
  CHECK(r.str() == "eta,probe,phi_true,mean,sigma,m_bar,sigma_scaled,crb\n");
  CHECK(e.str() == "eta,probe,phi_true,series_id,phi_hat,loglik,n_coinc\n");
}
