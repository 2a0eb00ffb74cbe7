// counqer: offline set-predicate pipeline and query service.
//
//   counqer profile  --config C --kb ID --out profiles.tsv [--min-subjects N]
//   counqer classify --config C --kb ID --in profiles.tsv --out catalog.tsv [--model M]
//   counqer align    --config C --kb ID --in catalog.tsv --out alignments.tsv [--manual F] [--min-score X]
//   counqer check    --config C --kb ID --in alignments.tsv --out report.tsv
//   counqer train    --config C --kb ID --in seed.tsv --out model.tsv
//   counqer serve    --config C [--port N]
//
// Exit status: 0 success, 1 validation error, 2 I/O or transport failure.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "counqer/http_api.hpp"
#include "counqer/pipeline.hpp"

namespace {

using namespace counqer;

struct Options {
  std::string config;
  std::string kb;
  std::string in;
  std::string out;
  std::string model;
  std::string manual;
  std::size_t min_subjects = 2;
  std::optional<double> min_score;
  std::optional<int> port;
};

void log(const std::string& msg) { std::cerr << "[counqer] " << msg << '\n'; }

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) throw IoError("cannot write " + path);
}

std::size_t data_rows(const std::string& tsv) {
  auto lines = static_cast<std::size_t>(std::count(tsv.begin(), tsv.end(), '\n'));
  return lines == 0 ? 0 : lines - 1;
}

std::unique_ptr<KnowledgeBase> open_configured(const Options& o, const Config& cfg) {
  return open_kb(cfg.kb(o.kb).descriptor);
}

int cmd_profile(const Options& o) {
  auto cfg = load_config(o.config);
  auto kb = open_configured(o, cfg);
  std::ostringstream ss;
  write_profiles_tsv(ss, run_profile(*kb, o.min_subjects));
  write_output(o.out, ss.str());
  log("profiled " + std::to_string(data_rows(ss.str())) + " directed predicates -> " + o.out);
  return 0;
}

int cmd_classify(const Options& o) {
  auto cfg = load_config(o.config);
  const auto& kcfg = cfg.kb(o.kb);
  auto in = open_input(o.in, "profiles");
  auto profiles = read_profiles_tsv(in);
  ClassifierModel model = ClassifierModel::rules();
  if (!o.model.empty()) model = load_model_file(o.model);
  else if (kcfg.model) model = load_model_file(*kcfg.model);
  auto kb = open_kb(kcfg.descriptor);
  std::ostringstream ss;
  write_catalog_tsv(ss, run_classify(*kb, profiles, model));
  write_output(o.out, ss.str());
  log("catalogued " + std::to_string(data_rows(ss.str())) + " set predicates -> " + o.out);
  return 0;
}

int cmd_align(const Options& o) {
  auto cfg = load_config(o.config);
  const auto& kcfg = cfg.kb(o.kb);
  auto in = open_input(o.in, "catalog");
  auto catalog = read_catalog_tsv(in);
  std::vector<ManualAlignment> manual;
  if (!o.manual.empty()) manual = load_manual_file(o.manual);
  auto kb = open_kb(kcfg.descriptor);
  auto table = run_align(*kb, catalog, manual, o.min_score.value_or(kcfg.min_score));
  std::ostringstream ss;
  write_alignments_tsv(ss, o.kb, table);
  write_output(o.out, ss.str());
  log("ranked " + std::to_string(table.size()) + " alignments -> " + o.out);
  return 0;
}

int cmd_check(const Options& o) {
  auto cfg = load_config(o.config);
  auto in = open_input(o.in, "alignment table");
  auto table = read_alignments_tsv(in);
  if (!table.rows.empty() && table.kb_id != o.kb)
    throw ValidationError("alignment table belongs to KB '" + table.kb_id + "'");
  auto kb = open_configured(o, cfg);
  auto reports = check_all(*kb->materialize(), table.rows);
  std::ostringstream ss;
  write_consistency_tsv(ss, reports);
  write_output(o.out, ss.str());
  log("checked " + std::to_string(reports.size()) + " subject/alignment pairs -> " + o.out);
  return 0;
}

int cmd_train(const Options& o) {
  auto cfg = load_config(o.config);
  auto in = open_input(o.in, "seed set");
  auto seed = read_seed_tsv(in);
  auto kb = open_configured(o, cfg);
  auto store = kb->materialize();
  std::vector<LabeledExample> data;
  for (const auto& e : seed)
    data.push_back({featurize(e.label, profile_predicate(*store, e.pred)), e.label_class});
  auto model = train(data);
  std::size_t correct = 0;
  for (const auto& ex : data)
    correct += classify(ex.features, PredicateProfile{}, model).variant == ex.label;
  std::ostringstream ss;
  write_model(ss, model);
  write_output(o.out, ss.str());
  log("trained on " + std::to_string(data.size()) + " examples, training accuracy " +
      std::to_string(correct) + "/" + std::to_string(data.size()) + " -> " + o.out);
  return 0;
}

ApiServer* g_server = nullptr;

int cmd_serve(const Options& o) {
  auto cfg = load_config(o.config);
  if (o.port) cfg.server.port = *o.port;
  auto service = build_service(cfg);
  ApiServer server(*service, cfg.server.static_dir);
  int port = server.bind(cfg.server.host, cfg.server.port);
  std::cout << "listening on http://" << cfg.server.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discover, align and query set predicates in RDF knowledge bases"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd, bool needs_in) {
    cmd->add_option("--config", o.config, "configuration file")->required();
    cmd->add_option("--kb", o.kb, "KB id from the configuration")->required();
    cmd->add_option("--out", o.out, "output file ('-' for stdout)")->required();
    if (needs_in) cmd->add_option("--in", o.in, "input table")->required();
  };

  auto* profile = app.add_subcommand("profile", "profile candidate predicates of a KB");
  add_common(profile, false);
  profile->add_option("--min-subjects", o.min_subjects, "minimum distinct subjects")
      ->check(CLI::PositiveNumber);

  auto* classify_cmd = app.add_subcommand("classify", "classify profiled predicates");
  add_common(classify_cmd, true);
  classify_cmd->add_option("--model", o.model, "trained model (default: rule model)");

  auto* align = app.add_subcommand("align", "rank counting/enumerating alignments");
  add_common(align, true);
  align->add_option("--manual", o.manual, "curated alignments to merge");
  align->add_option("--min-score", o.min_score, "minimum automatic score")->check(CLI::Range(0.0, 1.0));

  auto* check = app.add_subcommand("check", "consistency report over an alignment table");
  add_common(check, true);

  auto* train_cmd = app.add_subcommand("train", "fit the supervised classifier on a labeled seed set");
  add_common(train_cmd, true);

  auto* serve = app.add_subcommand("serve", "run the HTTP query service");
  serve->add_option("--config", o.config, "configuration file")->required();
  serve->add_option("--port", o.port, "listen port (0 = ephemeral)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*profile) return cmd_profile(o);
    if (*classify_cmd) return cmd_classify(o);
    if (*align) return cmd_align(o);
    if (*check) return cmd_check(o);
    if (*train_cmd) return cmd_train(o);
    if (*serve) return cmd_serve(o);
  } catch (const IoError& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const TransportError& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const ProtocolError& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 1;
}
