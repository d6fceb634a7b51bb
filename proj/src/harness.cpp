#include "dynathink/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dynathink/serialization.hpp"

namespace dynathink {

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Fixture: return "fixture";
    case BackendKind::Synthetic: return "synthetic";
  }
  return "unknown";
}

BackendKind parse_backend_kind(const std::string& text) {
  if (text == "http") return BackendKind::Http;
  if (text == "fixture") return BackendKind::Fixture;
  if (text == "synthetic") return BackendKind::Synthetic;
  throw std::invalid_argument("unknown backend '" + text + "' (expected http|fixture|synthetic)");
}

namespace {

std::string read_text(const std::string& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(field, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads j[key] as T, reporting failures against "section.key".
template <typename T>
void read_field(const json& j, const char* key, const std::string& section, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section.empty() ? key : section + "." + key, e.what());
  }
}

template <typename Parser>
auto parse_enum(const std::string& field, const std::string& text, Parser parser) {
  try {
    return parser(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(section.empty() ? key : section + "." + key, "unknown configuration key");
  }
}

void apply_backend_section(const json& b, RunConfig& c) {
  reject_unknown(b, "backend",
                 {"kind", "fixture", "profile", "endpoint", "token_env", "model", "temperature",
                  "max_tokens", "max_attempts", "base_backoff_ms", "max_in_flight", "requests_per_minute",
                  "native_multi_sample", "timeout_s", "parallel"});
  std::string kind = to_string(c.backend);
  read_field(b, "kind", "backend", kind);
  c.backend = parse_enum("backend.kind", kind, parse_backend_kind);
  read_field(b, "fixture", "backend", c.fixture);
  read_field(b, "profile", "backend", c.profile);
  read_field(b, "endpoint", "backend", c.http.endpoint);
  read_field(b, "token_env", "backend", c.http.token_env);
  read_field(b, "model", "backend", c.options.model_id);
  read_field(b, "temperature", "backend", c.options.temperature);
  read_field(b, "max_tokens", "backend", c.options.max_tokens);
  read_field(b, "max_attempts", "backend", c.http.max_attempts);
  long long backoff = c.http.base_backoff.count();
  read_field(b, "base_backoff_ms", "backend", backoff);
  c.http.base_backoff = std::chrono::milliseconds(backoff);
  read_field(b, "max_in_flight", "backend", c.http.max_in_flight);
  read_field(b, "requests_per_minute", "backend", c.http.requests_per_minute);
  read_field(b, "native_multi_sample", "backend", c.http.native_multi_sample);
  long long timeout = c.http.timeout.count();
  read_field(b, "timeout_s", "backend", timeout);
  c.http.timeout = std::chrono::seconds(timeout);
  read_field(b, "parallel", "backend", c.options.max_parallel);
}

void apply_policy_section(const json& p, PolicyConfig& policy) {
  reject_unknown(p, "policy",
                 {"threshold_mode", "verification_order", "initial_n", "increment", "budget_cap",
                  "slow_resolver", "require_unique_min_steps", "spend_to_cap"});
  std::string mode = to_string(policy.threshold_mode);
  read_field(p, "threshold_mode", "policy", mode);
  policy.threshold_mode = parse_enum("policy.threshold_mode", mode, parse_threshold_mode);
  std::string order = to_string(policy.verification_order);
  read_field(p, "verification_order", "policy", order);
  policy.verification_order = parse_enum("policy.verification_order", order, parse_verification_order);
  read_field(p, "initial_n", "policy", policy.initial_n);
  read_field(p, "increment", "policy", policy.increment);
  read_field(p, "budget_cap", "policy", policy.budget_cap);
  std::string resolver = "self-consistency-at-cap";
  read_field(p, "slow_resolver", "policy", resolver);
  if (resolver != "self-consistency-at-cap") {
    throw ConfigError("policy.slow_resolver", "only self-consistency-at-cap is available");
  }
  read_field(p, "require_unique_min_steps", "policy", policy.require_unique_min_steps);
  read_field(p, "spend_to_cap", "policy", policy.spend_to_cap);
}

void apply_sweep_section(const json& s, SweepGrid& grid) {
  reject_unknown(s, "sweep", {"threshold_modes", "verification_orders", "budget_caps", "with_baseline"});
  if (s.contains("threshold_modes")) {
    std::vector<std::string> names;
    read_field(s, "threshold_modes", "sweep", names);
    grid.threshold_modes.clear();
    for (const auto& n : names) grid.threshold_modes.push_back(parse_enum("sweep.threshold_modes", n, parse_threshold_mode));
  }
  if (s.contains("verification_orders")) {
    std::vector<std::string> names;
    read_field(s, "verification_orders", "sweep", names);
    grid.verification_orders.clear();
    for (const auto& n : names) {
      grid.verification_orders.push_back(parse_enum("sweep.verification_orders", n, parse_verification_order));
    }
  }
  read_field(s, "budget_caps", "sweep", grid.budget_caps);
  read_field(s, "with_baseline", "sweep", grid.with_baseline);
}

std::string fmt_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string row_prefix(const SummaryRow& row) {
  std::string out = row.policy + ",";
  out += (row.threshold_mode ? to_string(*row.threshold_mode) : "none") + ",";
  out += (row.verification_order ? to_string(*row.verification_order) : "none") + ",";
  out += std::to_string(row.initial_n) + "," + std::to_string(row.increment) + "," +
         std::to_string(row.budget_cap);
  return out;
}

SummaryRow make_row(const AccuracyReport& report, int rounds) {
  SummaryRow row;
  row.accuracy = report.overall.accuracy().value_or(0.0);
  row.fast_count = report.fast_count();
  row.slow_count = report.slow_count();
  row.total_queries = report.total_queries;
  row.rounds = rounds;
  row.buckets = report.by_steps;
  return row;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string ledger_document(const CostLedger& ledger, const std::string& command, const RunConfig& config,
                            int rounds, double wall_time, const std::optional<std::string>& error) {
  json doc = {{"command", command},
              {"backend", to_string(config.backend)},
              {"policy", config.policy},
              {"rounds", rounds},
              {"wall_time_seconds", wall_time},
              {"aborted", error.has_value()},
              {"ledger", ledger}};
  if (error) doc["error"] = *error;
  return doc.dump(2) + "\n";
}

std::string verdicts_jsonl(const RunResult& result, std::span<const Question> questions) {
  std::string out;
  for (const auto& q : questions) {
    out += encode_verdict_line(result.verdicts.at(q.id));
    out += '\n';
  }
  return out;
}

RunOptions resolved_options(const RunConfig& config) {
  RunOptions options = config.options;
  if (config.prompt_prefix_file) options.prompt_prefix = read_text(*config.prompt_prefix_file, "prompt_prefix_file");
  return options;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared body of `run` and `baseline`.
int run_single(const RunConfig& config, Command command, std::ostream& log) {
  validate(config, command);
  const std::string name = command == Command::Run ? "run" : "baseline";
  auto backend = make_backend(config);
  const auto questions = resolve_questions(config, *backend);
  const auto options = resolved_options(config);
  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  const auto start = Clock::now();
  CellResult cell;
  try {
    cell = command == Command::Run ? run_cell(questions, *backend, config.policy, options)
                                   : baseline_cell(questions, *backend, config.policy.budget_cap, options);
  } catch (const RunAborted& e) {
    write_file(out_dir / "ledger.json",
               ledger_document(e.partial_ledger(), name, config, 0, seconds_since(start), std::string(e.what())));
    throw;
  }
  const double wall = seconds_since(start);
  if (config.record_wall_time) cell.row.wall_time = wall;

  write_file(out_dir / "verdicts.jsonl", verdicts_jsonl(cell.result, questions));
  write_file(out_dir / "ledger.json", ledger_document(cell.result.ledger, name, config, cell.result.rounds, wall, {}));
  write_file(out_dir / "summary.csv", summary_csv_header() + summary_csv_line(cell.row));
  write_file(out_dir / "buckets.csv", buckets_csv_header() + buckets_csv_lines(cell.row));

  log << name << ": " << questions.size() << " questions, accuracy " << fmt_fixed(cell.row.accuracy, 4)
      << ", fast " << cell.row.fast_count << ", slow " << cell.row.slow_count << ", queries "
      << cell.row.total_queries << ", rounds " << cell.row.rounds << " -> " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  reject_unknown(doc, "", {"dataset", "dataset_format", "out", "seed", "prompt_prefix_file", "record_wall_time",
                           "backend", "policy", "sweep"});
  RunConfig c;
  if (doc.contains("dataset")) {
    std::string path;
    read_field(doc, "dataset", "", path);
    c.dataset = path;
  }
  if (doc.contains("dataset_format")) {
    std::string f;
    read_field(doc, "dataset_format", "", f);
    c.dataset_format = parse_enum("dataset_format", f, parse_answer_kind);
  }
  read_field(doc, "out", "", c.out_dir);
  if (doc.contains("seed")) {
    std::uint64_t seed = 0;
    read_field(doc, "seed", "", seed);
    c.seed = seed;
  }
  if (doc.contains("prompt_prefix_file")) {
    std::string path;
    read_field(doc, "prompt_prefix_file", "", path);
    c.prompt_prefix_file = path;
  }
  read_field(doc, "record_wall_time", "", c.record_wall_time);
  if (doc.contains("backend")) apply_backend_section(doc.at("backend"), c);
  if (doc.contains("policy")) apply_policy_section(doc.at("policy"), c.policy);
  if (doc.contains("sweep")) apply_sweep_section(doc.at("sweep"), c.sweep);
  return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path, "config")); }

void validate(const RunConfig& c, Command command) {
  const auto& p = c.policy;
  if (p.initial_n < 1) throw ConfigError("initial_n", "must be >= 1");
  if (p.increment < 1) throw ConfigError("increment", "must be >= 1");
  if (command != Command::Sweep && p.budget_cap < p.initial_n) {
    throw ConfigError("budget_cap", "must be >= initial_n");
  }
  if (command == Command::Sweep) {
    if (c.sweep.budget_caps.empty()) throw ConfigError("sweep.budget_caps", "must not be empty");
    for (int cap : c.sweep.budget_caps) {
      if (cap < p.initial_n) throw ConfigError("sweep.budget_caps", "every cap must be >= initial_n");
    }
    if (c.sweep.threshold_modes.empty()) throw ConfigError("sweep.threshold_modes", "must not be empty");
    if (c.sweep.verification_orders.empty()) throw ConfigError("sweep.verification_orders", "must not be empty");
  }
  if (c.options.temperature < 0) throw ConfigError("temperature", "must be >= 0");
  if (c.options.temperature == 0 && (p.budget_cap > 1 || command == Command::Sweep)) {
    throw ConfigError("temperature", "must be > 0 when more than one sample per question is drawn");
  }
  if (c.options.max_tokens < 1) throw ConfigError("max_tokens", "must be >= 1");
  if (c.options.max_parallel < 1) throw ConfigError("parallel", "must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("out", "must not be empty");
  switch (c.backend) {
    case BackendKind::Fixture:
      if (c.fixture.empty()) throw ConfigError("fixture", "required for the fixture backend");
      if (!c.dataset) throw ConfigError("dataset", "required for the fixture backend");
      break;
    case BackendKind::Synthetic:
      if (c.profile.empty()) throw ConfigError("profile", "required for the synthetic backend");
      break;
    case BackendKind::Http:
      if (!c.dataset) throw ConfigError("dataset", "required for the http backend");
      if (c.http.endpoint.rfind("http://", 0) != 0 && c.http.endpoint.rfind("https://", 0) != 0) {
        throw ConfigError("endpoint", "must be an http:// or https:// URL");
      }
      if (c.http.max_attempts < 1) throw ConfigError("max_attempts", "must be >= 1");
      break;
  }
}

std::optional<CliInvocation> parse_cli(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Adaptive fast/slow routing of reasoning questions over sampled completions", "dynathink"};
  app.require_subcommand(1, 1);

  struct Flags {
    std::string config, dataset, format, backend, fixture, profile, threshold, order, out, prompt_prefix,
        model, endpoint, token_env;
    int initial_n = 0, increment = 0, budget_cap = 0, max_tokens = 0, max_attempts = 0;
    std::uint64_t seed = 0;
    double temperature = 0;
    std::size_t parallel = 0;
    std::vector<int> caps;
    std::vector<std::string> thresholds, orders;
  } f;

  std::map<std::string, CLI::App*> subs;
  subs["run"] = app.add_subcommand("run", "Classify questions fast/slow and resolve slow ones by self-consistency");
  subs["baseline"] = app.add_subcommand("baseline", "Plain self-consistency with budget-cap samples per question");
  subs["sweep"] = app.add_subcommand("sweep", "Grid of runs over threshold modes x orders x budget caps");

  struct Given {
    CLI::App* sub;
    std::string name;
    CLI::Option* option;
  };
  std::vector<Given> given;
  auto opt = [&](CLI::App* sub, const std::string& name, auto& target, const std::string& help) {
    auto* o = sub->add_option("--" + name, target, help);
    given.push_back({sub, name, o});
    return o;
  };
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    given.push_back({sub, name, sub->add_flag("--" + name, help)});
  };
  for (auto& [name, sub] : subs) {
    opt(sub, "config", f.config, "JSON config file; flags override its values");
    opt(sub, "dataset", f.dataset, "JSON Lines dataset");
    opt(sub, "format", f.format, "numeric|multiple-choice|boolean|freeform-boxed");
    opt(sub, "backend", f.backend, "http|fixture|synthetic");
    opt(sub, "fixture", f.fixture, "fixture JSON Lines file (fixture backend)");
    opt(sub, "profile", f.profile, "synthetic profile JSON (synthetic backend)");
    opt(sub, "threshold", f.threshold, "plurality|strict-majority|unanimous");
    opt(sub, "order", f.order, "consistency-steps|steps-consistency");
    opt(sub, "initial-n", f.initial_n, "samples per question in the first round");
    opt(sub, "increment", f.increment, "growth of n per round");
    opt(sub, "budget-cap", f.budget_cap, "maximum samples per question");
    opt(sub, "seed", f.seed, "synthetic backend seed (overrides the profile's)");
    opt(sub, "out", f.out, "output directory");
    opt(sub, "prompt-prefix", f.prompt_prefix, "file whose text precedes the instruction (few-shot exemplars)");
    opt(sub, "model", f.model, "model id sent to the http backend");
    opt(sub, "endpoint", f.endpoint, "chat-completions URL");
    opt(sub, "token-env", f.token_env, "environment variable holding the bearer token");
    opt(sub, "temperature", f.temperature, "sampling temperature");
    opt(sub, "max-tokens", f.max_tokens, "completion token limit");
    opt(sub, "max-attempts", f.max_attempts, "http attempts per request before giving up");
    opt(sub, "parallel", f.parallel, "concurrent generation requests per round");
    flag(sub, "unique-min-steps", "winner must be the only answer at the step minimum");
    flag(sub, "spend-to-cap", "keep growing n after a round with no fast question");
    flag(sub, "wall-time", "fill the summary wall_time column");
  }
  opt(subs["sweep"], "caps", f.caps, "budget caps, comma separated")->delimiter(',');
  opt(subs["sweep"], "thresholds", f.thresholds, "threshold modes, comma separated")->delimiter(',');
  opt(subs["sweep"], "orders", f.orders, "verification orders, comma separated")->delimiter(',');
  flag(subs["sweep"], "with-baseline", "add a self-consistency row per cap");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError("command line", e.what());
  }

  CliInvocation inv;
  CLI::App* active = nullptr;
  for (auto& [name, sub] : subs) {
    if (sub->parsed()) {
      active = sub;
      inv.command = name == "run" ? Command::Run : name == "baseline" ? Command::Baseline : Command::Sweep;
    }
  }
  auto set = [&](const std::string& name) {
    for (const auto& g : given) {
      if (g.sub == active && g.name == name && g.option->count() > 0) return true;
    }
    return false;
  };

  RunConfig& c = inv.config;
  if (set("config")) c = load_config(f.config);
  if (set("dataset")) c.dataset = f.dataset;
  if (set("format")) c.dataset_format = parse_enum("format", f.format, parse_answer_kind);
  if (set("backend")) c.backend = parse_enum("backend", f.backend, parse_backend_kind);
  if (set("fixture")) c.fixture = f.fixture;
  if (set("profile")) c.profile = f.profile;
  if (set("threshold")) c.policy.threshold_mode = parse_enum("threshold", f.threshold, parse_threshold_mode);
  if (set("order")) c.policy.verification_order = parse_enum("order", f.order, parse_verification_order);
  if (set("initial-n")) c.policy.initial_n = f.initial_n;
  if (set("increment")) c.policy.increment = f.increment;
  if (set("budget-cap")) c.policy.budget_cap = f.budget_cap;
  if (set("seed")) c.seed = f.seed;
  if (set("out")) c.out_dir = f.out;
  if (set("prompt-prefix")) c.prompt_prefix_file = f.prompt_prefix;
  if (set("model")) c.options.model_id = f.model;
  if (set("endpoint")) c.http.endpoint = f.endpoint;
  if (set("token-env")) c.http.token_env = f.token_env;
  if (set("temperature")) c.options.temperature = f.temperature;
  if (set("max-tokens")) c.options.max_tokens = f.max_tokens;
  if (set("max-attempts")) c.http.max_attempts = f.max_attempts;
  if (set("parallel")) c.options.max_parallel = f.parallel;
  if (set("unique-min-steps")) c.policy.require_unique_min_steps = true;
  if (set("spend-to-cap")) c.policy.spend_to_cap = true;
  if (set("wall-time")) c.record_wall_time = true;
  if (set("caps")) c.sweep.budget_caps = f.caps;
  if (set("thresholds")) {
    c.sweep.threshold_modes.clear();
    for (const auto& t : f.thresholds) c.sweep.threshold_modes.push_back(parse_enum("thresholds", t, parse_threshold_mode));
  }
  if (set("orders")) {
    c.sweep.verification_orders.clear();
    for (const auto& o : f.orders) c.sweep.verification_orders.push_back(parse_enum("orders", o, parse_verification_order));
  }
  if (set("with-baseline")) c.sweep.with_baseline = true;
  return inv;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
  switch (config.backend) {
    case BackendKind::Fixture: return std::make_unique<FixtureBackend>(FixtureBackend::from_file(config.fixture));
    case BackendKind::Synthetic:
      return std::make_unique<SyntheticBackend>(SyntheticBackend::from_file(config.profile, config.seed));
    case BackendKind::Http: return std::make_unique<HttpBackend>(config.http);
  }
  throw ConfigError("backend", "unknown backend");
}

std::vector<Question> resolve_questions(const RunConfig& config, const Backend& backend) {
  if (config.dataset) return load_dataset(*config.dataset, config.dataset_format);
  if (const auto* synthetic = dynamic_cast<const SyntheticBackend*>(&backend)) return synthetic->questions();
  throw ConfigError("dataset", "required unless the synthetic profile supplies the questions");
}

CellResult run_cell(std::span<const Question> questions, Backend& backend, const PolicyConfig& policy,
                    const RunOptions& options) {
  CellResult cell;
  cell.result = run(questions, backend, policy, options);
  cell.report = score(cell.result.verdicts, questions);
  cell.row = make_row(cell.report, cell.result.rounds);
  cell.row.policy = "dynathink";
  cell.row.threshold_mode = policy.threshold_mode;
  cell.row.verification_order = policy.verification_order;
  cell.row.initial_n = policy.initial_n;
  cell.row.increment = policy.increment;
  cell.row.budget_cap = policy.budget_cap;
  return cell;
}

CellResult baseline_cell(std::span<const Question> questions, Backend& backend, int n, const RunOptions& options) {
  CellResult cell;
  cell.result = run_sc_baseline(questions, backend, n, options);
  cell.report = score(cell.result.verdicts, questions);
  cell.row = make_row(cell.report, cell.result.rounds);
  cell.row.policy = "sc-baseline";
  cell.row.initial_n = n;
  cell.row.increment = 0;
  cell.row.budget_cap = n;
  return cell;
}

std::vector<CellResult> sweep(std::span<const Question> questions, Backend& backend, const RunConfig& config) {
  std::vector<CellResult> cells;
  const auto options = resolved_options(config);
  for (ThresholdMode mode : config.sweep.threshold_modes) {
    for (VerificationOrder order : config.sweep.verification_orders) {
      for (int cap : config.sweep.budget_caps) {
        PolicyConfig policy = config.policy;
        policy.threshold_mode = mode;
        policy.verification_order = order;
        policy.budget_cap = cap;
        cells.push_back(run_cell(questions, backend, policy, options));
      }
    }
  }
  if (config.sweep.with_baseline) {
    for (int cap : config.sweep.budget_caps) cells.push_back(baseline_cell(questions, backend, cap, options));
  }
  return cells;
}

std::string summary_csv_header() {
  return "policy,threshold_mode,order,initial_n,increment,budget_cap,accuracy,fast_count,slow_count,"
         "total_queries,wall_time\n";
}

std::string summary_csv_line(const SummaryRow& row) {
  std::string out = row_prefix(row);
  out += "," + fmt_fixed(row.accuracy, 6) + "," + std::to_string(row.fast_count) + "," +
         std::to_string(row.slow_count) + "," + std::to_string(row.total_queries) + ",";
  if (row.wall_time) out += fmt_fixed(*row.wall_time, 3);
  out += "\n";
  return out;
}

std::string buckets_csv_header() {
  return "policy,threshold_mode,order,initial_n,increment,budget_cap,step_count,questions,correct,accuracy\n";
}

std::string buckets_csv_lines(const SummaryRow& row) {
  std::string out;
  for (const auto& [steps, tally] : row.buckets) {
    out += row_prefix(row) + "," + std::to_string(steps) + "," + std::to_string(tally.total) + "," +
           std::to_string(tally.correct) + "," + fmt_fixed(tally.accuracy().value_or(0.0), 6) + "\n";
  }
  return out;
}

int cmd_run(const RunConfig& config, std::ostream& log) { return run_single(config, Command::Run, log); }

int cmd_baseline(const RunConfig& config, std::ostream& log) {
  return run_single(config, Command::Baseline, log);
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  validate(config, Command::Sweep);
  auto backend = make_backend(config);
  const auto questions = resolve_questions(config, *backend);
  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<CellResult> cells;
  const auto start = Clock::now();
  try {
    cells = sweep(questions, *backend, config);
  } catch (const RunAborted& e) {
    write_file(out_dir / "ledger.json",
               ledger_document(e.partial_ledger(), "sweep", config, 0, seconds_since(start), std::string(e.what())));
    throw;
  }
  std::string summary = summary_csv_header();
  std::string buckets = buckets_csv_header();
  for (auto& cell : cells) {
    summary += summary_csv_line(cell.row);
    buckets += buckets_csv_lines(cell.row);
  }
  write_file(out_dir / "summary.csv", summary);
  write_file(out_dir / "buckets.csv", buckets);
  log << "sweep: " << cells.size() << " grid points over " << questions.size() << " questions -> "
      << out_dir.string() << "\n";
  return 0;
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    auto inv = parse_cli(args, out);
    if (!inv) return 0;
    switch (inv->command) {
      case Command::Run: return cmd_run(inv->config, out);
      case Command::Baseline: return cmd_baseline(inv->config, out);
      case Command::Sweep: return cmd_sweep(inv->config, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RunAborted& e) {
    err << "run aborted: " << e.what() << " (partial ledger: " << e.partial_ledger().total << " queries)\n";
    return 3;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dynathink
