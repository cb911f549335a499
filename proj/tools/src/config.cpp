#include "transq/tools/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "transq/error.hpp"

namespace transq::tools {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Offline: return "offline";
    case ExperimentKind::OnlineEtc: return "online_etc";
    case ExperimentKind::OnlinePhased: return "online_phased";
    case ExperimentKind::Online: return "online";
    case ExperimentKind::Fqi: return "fqi";
    case ExperimentKind::Oracle: return "oracle";
  }
  return "unknown";
}

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Maps the JSON pointer of every object key and array element to the line it
// starts on. Runs after nlohmann has accepted the text, so it can assume the
// input is well formed.
std::map<std::string, int> locate_lines(const std::string& text) {
  struct Frame {
    std::string path;
    bool object = false;
    int index = 0;
    bool expect_key = true;
    std::string key;
  };
  std::map<std::string, int> lines;
  std::vector<Frame> stack;
  int line = 1;

  auto element_path = [&]() -> std::string {
    const Frame& f = stack.back();
    return f.path + "/" + (f.object ? escape_token(f.key) : std::to_string(f.index));
  };
  auto mark_value = [&]() {
    if (stack.empty()) return;
    lines.emplace(element_path(), line);
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          s += text[++i];
        } else {
          s += text[i];
        }
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        stack.back().key = s;
        stack.back().expect_key = false;
        lines.emplace(element_path(), line);
      } else {
        mark_value();
      }
    } else if (c == '{' || c == '[') {
      mark_value();
      Frame f;
      f.path = stack.empty() ? "" : element_path();
      f.object = (c == '{');
      stack.push_back(std::move(f));
    } else if (c == '}' || c == ']') {
      stack.pop_back();
    } else if (c == ',') {
      if (stack.back().object) stack.back().expect_key = true;
      else ++stack.back().index;
    } else if (c != ':' && c != ' ' && c != '\t' && c != '\r') {
      mark_value();
    }
  }
  return lines;
}

class Reader {
 public:
  Reader(std::string name, std::map<std::string, int> lines) : name_(std::move(name)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    std::ostringstream os;
    os << name_ << ":" << line_of(pointer) << ": " << display(pointer) << ": " << msg;
    throw Error(ErrorCode::InvalidConfig, os.str());
  }

  void allow(const json& obj, const std::string& pointer, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : obj.items()) {
      if (!allowed.count(item.key())) fail(pointer + "/" + escape_token(item.key()), "unknown key");
    }
  }

  double number(const json& obj, const std::string& pointer, const char* key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(child(pointer, key), "expected a number");
    return v.get<double>();
  }

  long long integer(const json& obj, const std::string& pointer, const char* key, long long fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(child(pointer, key), "expected an integer");
    return v.get<long long>();
  }

  long long positive(const json& obj, const std::string& pointer, const char* key, long long fallback) const {
    const long long v = integer(obj, pointer, key, fallback);
    if (v < 1) fail(child(pointer, key), "must be >= 1");
    return v;
  }

  std::string text(const json& obj, const std::string& pointer, const char* key, const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(child(pointer, key), "expected a string");
    return v.get<std::string>();
  }

  static std::string child(const std::string& pointer, const std::string& key) {
    return pointer + "/" + escape_token(key);
  }

 private:
  int line_of(std::string pointer) const {
    while (true) {
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      const auto cut = pointer.rfind('/');
      if (cut == std::string::npos || pointer.empty()) return 1;
      pointer.resize(cut);
    }
  }

  static std::string display(const std::string& pointer) {
    if (pointer.empty()) return "<root>";
    std::string out;
    std::size_t pos = 1;
    while (pos <= pointer.size()) {
      const auto next = pointer.find('/', pos);
      std::string token = pointer.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      const bool index = !token.empty() && token.find_first_not_of("0123456789") == std::string::npos;
      if (index) out += "[" + token + "]";
      else out += (out.empty() ? "" : ".") + token;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return out;
  }

  std::string name_;
  std::map<std::string, int> lines_;
};

ExperimentKind parse_kind(const Reader& rd, const std::string& pointer, const std::string& s) {
  static const std::map<std::string, ExperimentKind> kinds{
      {"simulate", ExperimentKind::Simulate}, {"offline", ExperimentKind::Offline},
      {"online_etc", ExperimentKind::OnlineEtc}, {"online_phased", ExperimentKind::OnlinePhased},
      {"online", ExperimentKind::Online}, {"fqi", ExperimentKind::Fqi}, {"oracle", ExperimentKind::Oracle}};
  auto it = kinds.find(s);
  if (it == kinds.end()) rd.fail(pointer, "unknown experiment '" + s + "'");
  return it->second;
}

void read_spec_fields(const Reader& rd, const json& obj, const std::string& ptr, TwoStageMdpSpec& spec) {
  spec.b1 = rd.number(obj, ptr, "b1", spec.b1);
  spec.b2 = rd.number(obj, ptr, "b2", spec.b2);
  spec.gamma = rd.number(obj, ptr, "gamma", spec.gamma);
  spec.p = static_cast<Eigen::Index>(rd.integer(obj, ptr, "p", spec.p));
  spec.noise_sd = rd.number(obj, ptr, "noise_sd", spec.noise_sd);
  if (obj.contains("kappa")) {
    const json& k = obj.at("kappa");
    const std::string kp = Reader::child(ptr, "kappa");
    if (!k.is_array() || k.size() != 7) rd.fail(kp, "expected an array of 7 numbers");
    for (std::size_t j = 0; j < 7; ++j) {
      if (!k[j].is_number()) rd.fail(kp + "/" + std::to_string(j), "expected a number");
      spec.kappa[j] = k[j].get<double>();
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    rd.fail(ptr, e.what());
  }
}

TwoStageMdpSpec read_target(const Reader& rd, const json& obj, const std::string& ptr) {
  rd.allow(obj, ptr, {"b1", "b2", "kappa", "gamma", "p", "noise_sd"});
  TwoStageMdpSpec spec;
  read_spec_fields(rd, obj, ptr, spec);
  return spec;
}

PenaltyChoice read_penalty(const Reader& rd, const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) return PenaltyChoice::cross_validation();
  const json& v = obj.at(key);
  const std::string kp = Reader::child(ptr, key);
  if (v.is_number()) {
    const double value = v.get<double>();
    if (!(value >= 0.0)) rd.fail(kp, "penalty must be >= 0");
    return PenaltyChoice::explicit_value(value);
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "cv") return PenaltyChoice::cross_validation();
    if (s == "theory") return PenaltyChoice::theory();
  }
  rd.fail(kp, "expected a number, \"cv\" or \"theory\"");
}

TransferConfig read_transfer(const Reader& rd, const json& obj, const std::string& ptr) {
  rd.allow(obj, ptr,
           {"lambda_src", "lambda_0", "c1", "cv_folds", "cv_grid_size", "cv_grid_ratio", "cv_tol", "s_hint",
            "h_hint", "offset", "pool", "lasso"});
  TransferConfig cfg;
  cfg.lambda_src = read_penalty(rd, obj, ptr, "lambda_src");
  cfg.lambda_0 = read_penalty(rd, obj, ptr, "lambda_0");
  cfg.c1 = rd.number(obj, ptr, "c1", cfg.c1);
  cfg.cv_folds = static_cast<int>(rd.integer(obj, ptr, "cv_folds", cfg.cv_folds));
  cfg.cv_grid_size = static_cast<int>(rd.integer(obj, ptr, "cv_grid_size", cfg.cv_grid_size));
  if (obj.contains("cv_grid_ratio")) cfg.cv_grid_ratio = rd.number(obj, ptr, "cv_grid_ratio", 0.0);
  cfg.cv_tol = rd.number(obj, ptr, "cv_tol", cfg.cv_tol);
  if (obj.contains("s_hint")) cfg.s_hint = rd.number(obj, ptr, "s_hint", 0.0);
  cfg.h_hint = rd.number(obj, ptr, "h_hint", cfg.h_hint);

  const std::string offset = rd.text(obj, ptr, "offset", "unthresholded");
  if (offset == "unthresholded") cfg.offset = OffsetMode::Unthresholded;
  else if (offset == "thresholded") cfg.offset = OffsetMode::Thresholded;
  else rd.fail(Reader::child(ptr, "offset"), "expected \"unthresholded\" or \"thresholded\"");

  const std::string pool = rd.text(obj, ptr, "pool", "target_and_sources");
  if (pool == "target_and_sources") cfg.pool = PoolMode::TargetAndSources;
  else if (pool == "sources_only") cfg.pool = PoolMode::SourcesOnly;
  else rd.fail(Reader::child(ptr, "pool"), "expected \"target_and_sources\" or \"sources_only\"");

  if (obj.contains("lasso")) {
    const json& l = obj.at("lasso");
    const std::string lp = Reader::child(ptr, "lasso");
    rd.allow(l, lp, {"max_sweeps", "tol", "standardize"});
    cfg.lasso.max_sweeps = static_cast<int>(rd.integer(l, lp, "max_sweeps", cfg.lasso.max_sweeps));
    cfg.lasso.tol = rd.number(l, lp, "tol", cfg.lasso.tol);
    if (l.contains("standardize")) {
      if (!l.at("standardize").is_boolean()) rd.fail(Reader::child(lp, "standardize"), "expected a boolean");
      cfg.lasso.standardize = l.at("standardize").get<bool>();
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    rd.fail(ptr, e.what());
  }
  return cfg;
}

OnlineSettings read_online(const Reader& rd, const json& obj, const std::string& ptr) {
  rd.allow(obj, ptr, {"n_e", "exploit", "batch_size", "n_phases"});
  OnlineSettings on;
  if (obj.contains("n_e")) {
    const json& g = obj.at("n_e");
    const std::string gp = Reader::child(ptr, "n_e");
    if (!g.is_array() || g.empty()) rd.fail(gp, "expected a non-empty array of integers");
    on.n_e_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number_integer() || g[i].get<long long>() < 1) rd.fail(gp + "/" + std::to_string(i), "must be an integer >= 1");
      on.n_e_grid.push_back(g[i].get<int>());
    }
  }
  on.exploit = static_cast<int>(rd.positive(obj, ptr, "exploit", on.exploit));
  on.batch_size = static_cast<int>(rd.positive(obj, ptr, "batch_size", on.batch_size));
  on.n_phases = static_cast<int>(rd.positive(obj, ptr, "n_phases", on.n_phases));
  return on;
}

FqiSettings read_fqi(const Reader& rd, const json& obj, const std::string& ptr) {
  rd.allow(obj, ptr, {"env", "chain", "tasks", "iterations", "lambda_w", "lambda_delta", "gamma", "subsample"});
  FqiSettings f;
  const std::string env = rd.text(obj, ptr, "env", "chain");
  if (env == "chain") f.env = FqiEnvironment::Chain;
  else if (env == "two_stage") f.env = FqiEnvironment::TwoStage;
  else rd.fail(Reader::child(ptr, "env"), "expected \"chain\" or \"two_stage\"");

  if (obj.contains("chain")) {
    const json& c = obj.at("chain");
    const std::string cp = Reader::child(ptr, "chain");
    rd.allow(c, cp, {"num_states", "gamma", "goal_reward", "edge_reward"});
    f.chain.num_states = static_cast<int>(rd.integer(c, cp, "num_states", f.chain.num_states));
    if (f.chain.num_states < 2) rd.fail(Reader::child(cp, "num_states"), "must be >= 2");
    f.chain.gamma = rd.number(c, cp, "gamma", f.chain.gamma);
    if (!(f.chain.gamma >= 0.0 && f.chain.gamma < 1.0)) rd.fail(Reader::child(cp, "gamma"), "must lie in [0,1)");
    f.chain.goal_reward = rd.number(c, cp, "goal_reward", f.chain.goal_reward);
    f.chain.edge_reward = rd.number(c, cp, "edge_reward", f.chain.edge_reward);
  }
  f.tasks = static_cast<int>(rd.integer(obj, ptr, "tasks", f.tasks));
  if (f.tasks < 0) rd.fail(Reader::child(ptr, "tasks"), "must be >= 0");
  f.iterations = static_cast<int>(rd.positive(obj, ptr, "iterations", f.iterations));
  f.lambda_w = rd.number(obj, ptr, "lambda_w", f.lambda_w);
  if (!(f.lambda_w >= 0.0)) rd.fail(Reader::child(ptr, "lambda_w"), "must be >= 0");
  f.lambda_delta = rd.number(obj, ptr, "lambda_delta", f.lambda_delta);
  if (!(f.lambda_delta >= 0.0)) rd.fail(Reader::child(ptr, "lambda_delta"), "must be >= 0");
  f.gamma = rd.number(obj, ptr, "gamma", f.gamma);
  if (!(f.gamma >= 0.0 && f.gamma < 1.0)) rd.fail(Reader::child(ptr, "gamma"), "must lie in [0,1)");
  if (obj.contains("subsample") && !obj.at("subsample").is_null()) {
    f.subsample = static_cast<Eigen::Index>(rd.positive(obj, ptr, "subsample", 1));
  }
  return f;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "... at line L, column C: ..."; keep its wording.
    throw Error(ErrorCode::InvalidConfig, name + ": " + e.what());
  }
  const Reader rd(name, locate_lines(text));
  rd.allow(root, "",
           {"schema_version", "experiment", "seed", "replications", "n0", "eval_size", "target", "sources",
            "transfer", "online", "fqi"});

  if (!root.contains("schema_version")) rd.fail("", "missing required key 'schema_version'");
  if (rd.integer(root, "", "schema_version", 0) != kSchemaVersion) {
    rd.fail("/schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  ExperimentConfig cfg;
  cfg.source_name = name;
  if (root.contains("experiment")) cfg.kind = parse_kind(rd, "/experiment", rd.text(root, "", "experiment", ""));
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned()) rd.fail("/seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.replications = static_cast<int>(rd.positive(root, "", "replications", cfg.replications));
  cfg.n0 = static_cast<Eigen::Index>(rd.positive(root, "", "n0", cfg.n0));
  cfg.eval_size = static_cast<Eigen::Index>(rd.positive(root, "", "eval_size", cfg.eval_size));

  if (root.contains("target")) cfg.target = read_target(rd, root.at("target"), "/target");

  if (root.contains("sources")) {
    const json& srcs = root.at("sources");
    if (!srcs.is_array()) rd.fail("/sources", "expected an array");
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      const std::string sp = "/sources/" + std::to_string(k);
      const json& obj = srcs[k];
      rd.allow(obj, sp, {"n", "b1", "b2", "kappa", "gamma", "p", "noise_sd"});
      if (!obj.contains("n")) rd.fail(sp, "missing required key 'n'");
      SourceSpec src;
      src.spec = cfg.target;  // unspecified fields inherit from the target
      read_spec_fields(rd, obj, sp, src.spec);
      src.n = static_cast<Eigen::Index>(rd.positive(obj, sp, "n", 1));
      if (src.spec.p != cfg.target.p) rd.fail(Reader::child(sp, "p"), "source p must equal target p");
      if (src.spec.gamma != cfg.target.gamma) rd.fail(Reader::child(sp, "gamma"), "source gamma must equal target gamma");
      cfg.sources.push_back(src);
    }
  }

  if (root.contains("transfer")) cfg.transfer = read_transfer(rd, root.at("transfer"), "/transfer");
  cfg.transfer.gamma = cfg.target.gamma;
  if (root.contains("online")) cfg.online = read_online(rd, root.at("online"), "/online");
  if (root.contains("fqi")) cfg.fqi = read_fqi(rd, root.at("fqi"), "/fqi");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace transq::tools
