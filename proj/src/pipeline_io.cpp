#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lrfnet/error.hpp"
#include "lrfnet/pipeline.hpp"

namespace lrfnet {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "lrfnet-pipeline";

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::FormatError, "model file field '" + path + "': " + what);
}

// Typed field access with the dotted path in every error.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  Node at(const std::string& key) const {
    if (!j_.is_object()) bad(path_, "expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) bad(join(key), "missing");
    return Node(*it, join(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  double num() const {
    if (!j_.is_number()) bad(path_, "expected a number");
    return j_.get<double>();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) bad(path_, "expected an integer");
    return j_.get<std::int64_t>();
  }
  std::uint64_t uinteger() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
      bad(path_, "expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) bad(path_, "expected a boolean");
    return j_.get<bool>();
  }
  std::string str() const {
    if (!j_.is_string()) bad(path_, "expected a string");
    return j_.get<std::string>();
  }
  std::size_t size() const {
    if (!j_.is_array()) bad(path_, "expected an array");
    return j_.size();
  }
  std::vector<double> nums() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).num();
    return out;
  }
  const std::string& path() const { return path_; }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
};

json write_tree(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"value", n.value}});
  }
  return nodes;
}

RegressionTree read_tree(const Node& j) {
  RegressionTree t;
  const std::size_t n = j.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Node node = j.at(i);
    TreeNode tn;
    tn.feature = static_cast<int>(node.at("feature").integer());
    tn.threshold = node.at("threshold").num();
    tn.left = static_cast<int>(node.at("left").integer());
    tn.right = static_cast<int>(node.at("right").integer());
    tn.value = node.at("value").num();
    const auto limit = static_cast<int>(n);
    if (tn.feature >= 0 && (tn.left <= static_cast<int>(i) || tn.right <= static_cast<int>(i) || tn.left >= limit ||
                            tn.right >= limit)) {
      bad(node.path(), "child index out of range");
    }
    t.nodes.push_back(tn);
  }
  if (t.nodes.empty()) bad(j.path(), "tree has no nodes");
  return t;
}

json write_config(const PipelineConfig& c) {
  return {{"m", c.m},
          {"backend", std::string(to_string(c.backend))},
          {"use_st", c.use_st},
          {"seed", c.seed},
          {"window_n", c.window_n},
          {"ridge_lambda", c.ridge_lambda},
          {"gbt",
           {{"n_rounds", c.gbt.n_rounds},
            {"max_depth", c.gbt.max_depth},
            {"shrinkage", c.gbt.shrinkage},
            {"min_leaf", c.gbt.min_leaf}}},
          {"mlp",
           {{"hidden_sizes", c.mlp.hidden_sizes},
            {"max_epochs", c.mlp.max_epochs},
            {"learning_rate", c.mlp.learning_rate},
            {"tol", c.mlp.tol}}}};
}

Backend read_backend(const Node& n) {
  try {
    return backend_from_string(n.str());
  } catch (const Error&) {
    bad(n.path(), "unknown backend '" + n.str() + "'");
  }
}

PipelineConfig read_config(const Node& j) {
  PipelineConfig c;
  c.m = j.at("m").uinteger();
  c.backend = read_backend(j.at("backend"));
  c.use_st = j.at("use_st").boolean();
  c.seed = j.at("seed").uinteger();
  c.window_n = j.at("window_n").uinteger();
  c.ridge_lambda = j.at("ridge_lambda").num();
  const Node g = j.at("gbt");
  c.gbt.n_rounds = static_cast<int>(g.at("n_rounds").integer());
  c.gbt.max_depth = static_cast<int>(g.at("max_depth").integer());
  c.gbt.shrinkage = g.at("shrinkage").num();
  c.gbt.min_leaf = static_cast<int>(g.at("min_leaf").integer());
  const Node p = j.at("mlp");
  const Node hs = p.at("hidden_sizes");
  c.mlp.hidden_sizes.clear();
  for (std::size_t i = 0; i < hs.size(); ++i) c.mlp.hidden_sizes.push_back(static_cast<int>(hs.at(i).integer()));
  c.mlp.max_epochs = static_cast<int>(p.at("max_epochs").integer());
  c.mlp.learning_rate = p.at("learning_rate").num();
  c.mlp.tol = p.at("tol").num();
  try {
    c.validate();
  } catch (const Error& e) {
    bad(j.path(), e.what());
  }
  return c;
}

json write_st(const StationaryModel& s) {
  json j = {{"branch", std::string(to_string(s.branch))},
            {"a1", s.a1},
            {"b1", s.b1},
            {"a2", s.a2},
            {"b2", s.b2},
            {"train_xs", s.train_xs},
            {"cum_state", s.cum_state}};
  j["k_est"] = s.k_est ? json(*s.k_est) : json(nullptr);
  j["base_est"] = s.base_est ? json(*s.base_est) : json(nullptr);
  return j;
}

std::optional<double> opt_num(const Node& parent, const std::string& key, const json& raw) {
  if (!parent.has(key) || raw.at(key).is_null()) return std::nullopt;
  return parent.at(key).num();
}

StationaryModel read_st(const Node& j, const json& raw) {
  StationaryModel s;
  const Node br = j.at("branch");
  try {
    s.branch = st_branch_from_string(br.str());
  } catch (const Error&) {
    bad(br.path(), "unknown branch '" + br.str() + "'");
  }
  s.a1 = j.at("a1").num();
  s.b1 = j.at("b1").num();
  s.a2 = j.at("a2").num();
  s.b2 = j.at("b2").num();
  s.train_xs = j.at("train_xs").nums();
  s.cum_state = j.at("cum_state").num();
  s.k_est = opt_num(j, "k_est", raw);
  s.base_est = opt_num(j, "base_est", raw);
  return s;
}

json write_lrf(const LrfModel& l) {
  json units = json::array();
  for (const auto& u : l.units) units.push_back({{"a", u.a}, {"b", u.b}, {"c", u.c}, {"d", u.d}});
  return {{"m", l.m}, {"ridge_lambda", l.ridge_lambda}, {"units", units}};
}

LrfModel read_lrf(const Node& j) {
  LrfModel l;
  l.m = j.at("m").uinteger();
  l.ridge_lambda = j.at("ridge_lambda").num();
  const Node units = j.at("units");
  if (units.size() != l.m) bad(units.path(), "expected " + std::to_string(l.m) + " units");
  for (std::size_t k = 0; k < l.m; ++k) {
    const Node u = units.at(k);
    LinearUnit lu{u.at("a").nums(), u.at("b").nums(), u.at("c").nums(), u.at("d").num()};
    if (lu.a.size() != l.m) bad(u.at("a").path(), "expected " + std::to_string(l.m) + " coefficients");
    if (lu.b.size() != l.m) bad(u.at("b").path(), "expected " + std::to_string(l.m) + " coefficients");
    if (lu.c.size() != k) bad(u.at("c").path(), "expected " + std::to_string(k) + " coefficients");
    l.units.push_back(std::move(lu));
  }
  return l;
}

json write_reg(const Regressor& r) {
  json j = {{"backend", std::string(to_string(r.backend()))}, {"n_features", r.n_features()}, {"seed", r.seed()}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["coef"] = m.fit.coef;
          j["intercept"] = m.fit.intercept;
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          j["base"] = m.base;
          j["train_mse"] = m.train_mse;
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(write_tree(t));
          j["trees"] = trees;
          j["params"] = {{"n_rounds", m.params.n_rounds},
                         {"max_depth", m.params.max_depth},
                         {"shrinkage", m.params.shrinkage},
                         {"min_leaf", m.params.min_leaf}};
        } else {
          std::vector<std::size_t> hidden = m.net.hidden();
          j["hidden"] = hidden;
          j["params"] = std::vector<double>(m.net.params().begin(), m.net.params().end());
          j["x_mean"] = m.x_mean;
          j["x_scale"] = m.x_scale;
          j["y_mean"] = m.y_mean;
          j["y_scale"] = m.y_scale;
          j["train_mse"] = m.train_mse;
          j["epochs_run"] = m.epochs_run;
          j["mlp_params"] = {{"hidden_sizes", m.params.hidden_sizes},
                             {"max_epochs", m.params.max_epochs},
                             {"learning_rate", m.params.learning_rate},
                             {"tol", m.params.tol}};
        }
      },
      r.impl());
  return j;
}

Regressor read_reg(const Node& j) {
  const Backend b = read_backend(j.at("backend"));
  const std::size_t nf = j.at("n_features").uinteger();
  const std::uint64_t seed = j.at("seed").uinteger();
  auto check_len = [&](const Node& n, std::size_t want) {
    if (n.size() != want) bad(n.path(), "expected " + std::to_string(want) + " entries");
  };
  switch (b) {
    case Backend::Linear: {
      LinearModel lm;
      lm.fit.coef = j.at("coef").nums();
      check_len(j.at("coef"), nf);
      lm.fit.intercept = j.at("intercept").num();
      return Regressor(std::move(lm), nf, seed);
    }
    case Backend::Gbt: {
      GbtModel gm;
      gm.base = j.at("base").num();
      gm.train_mse = j.at("train_mse").nums();
      const Node trees = j.at("trees");
      for (std::size_t t = 0; t < trees.size(); ++t) {
        gm.trees.push_back(read_tree(trees.at(t)));
        for (const auto& n : gm.trees.back().nodes) {
          if (n.feature >= static_cast<int>(nf)) bad(trees.at(t).path(), "split feature out of range");
        }
      }
      const Node p = j.at("params");
      gm.params.n_rounds = static_cast<int>(p.at("n_rounds").integer());
      gm.params.max_depth = static_cast<int>(p.at("max_depth").integer());
      gm.params.shrinkage = p.at("shrinkage").num();
      gm.params.min_leaf = static_cast<int>(p.at("min_leaf").integer());
      return Regressor(std::move(gm), nf, seed);
    }
    case Backend::Mlp: {
      MlpModel mm;
      const Node hn = j.at("hidden");
      std::vector<std::size_t> hidden;
      for (std::size_t i = 0; i < hn.size(); ++i) {
        const auto h = hn.at(i).integer();
        if (h < 1) bad(hn.at(i).path(), "hidden size must be >= 1");
        hidden.push_back(static_cast<std::size_t>(h));
      }
      if (hidden.empty()) bad(hn.path(), "at least one hidden layer required");
      mm.net = MlpNet(nf, hidden);
      const Node params = j.at("params");
      check_len(params, mm.net.num_params());
      mm.net.mutable_params() = params.nums();
      mm.x_mean = j.at("x_mean").nums();
      check_len(j.at("x_mean"), nf);
      mm.x_scale = j.at("x_scale").nums();
      check_len(j.at("x_scale"), nf);
      mm.y_mean = j.at("y_mean").num();
      mm.y_scale = j.at("y_scale").num();
      mm.train_mse = j.at("train_mse").num();
      mm.epochs_run = static_cast<int>(j.at("epochs_run").integer());
      const Node p = j.at("mlp_params");
      const Node hs = p.at("hidden_sizes");
      mm.params.hidden_sizes.clear();
      for (std::size_t i = 0; i < hs.size(); ++i) mm.params.hidden_sizes.push_back(static_cast<int>(hs.at(i).integer()));
      mm.params.max_epochs = static_cast<int>(p.at("max_epochs").integer());
      mm.params.learning_rate = p.at("learning_rate").num();
      mm.params.tol = p.at("tol").num();
      return Regressor(std::move(mm), nf, seed);
    }
  }
  bad(j.path(), "unknown backend");
}

json write_series(const Series& s) {
  return {{"xs", std::vector<double>(s.xs().begin(), s.xs().end())},
          {"ys", std::vector<double>(s.ys().begin(), s.ys().end())}};
}

Series read_series(const Node& j) {
  try {
    return Series(j.at("xs").nums(), j.at("ys").nums());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FormatError) throw;
    bad(j.path(), e.what());
  }
}

}  // namespace

std::string to_json(const FittedPipeline& p) {
  json j = {{"format", kFormatTag},
            {"version", kPipelineFormatVersion},
            {"config", write_config(p.config)},
            {"norm", {{"y_min", p.norm.y_min}, {"y_max", p.norm.y_max}, {"bypass", p.norm.bypass}}},
            {"stationary", write_st(p.st)},
            {"lrf", write_lrf(p.lrf)},
            {"regressor", write_reg(p.reg)},
            {"train_tail", write_series(p.train_tail)}};
  return j.dump(1);
}

FittedPipeline from_json(const std::string& text) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, std::string("model file is not valid JSON: ") + e.what());
  }
  const Node root(raw, "");
  if (!root.has("format")) bad("format", "missing");
  if (root.at("format").str() != kFormatTag) bad("format", "expected '" + std::string(kFormatTag) + "'");
  const auto version = root.at("version").integer();
  if (version != kPipelineFormatVersion) {
    bad("version", "unsupported version " + std::to_string(version));
  }

  PipelineConfig cfg = read_config(root.at("config"));
  const Node n = root.at("norm");
  NormParams norm{n.at("y_min").num(), n.at("y_max").num(), n.at("bypass").boolean()};
  if (!norm.bypass && !(norm.y_max > norm.y_min)) bad("norm", "y_max must exceed y_min");
  StationaryModel st = read_st(root.at("stationary"), raw.at("stationary"));
  LrfModel lrf = read_lrf(root.at("lrf"));
  Regressor reg = read_reg(root.at("regressor"));
  Series tail = read_series(root.at("train_tail"));

  if (lrf.m != cfg.m) bad("lrf.m", "does not match config.m");
  if (reg.n_features() != lrf.m) bad("regressor.n_features", "does not match lrf.m");
  if (tail.size() < min_lrf_length(lrf.m)) bad("train_tail", "too short for m");
  if (st.train_xs.size() != tail.size()) bad("stationary.train_xs", "does not match train_tail length");
  return FittedPipeline{cfg, norm, std::move(st), std::move(lrf), std::move(reg), std::move(tail)};
}

void save(const FittedPipeline& p, std::ostream& out) {
  out << to_json(p) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "failed writing model");
}

FittedPipeline load(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void save_file(const FittedPipeline& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  save(p, out);
}

FittedPipeline load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open model file '" + path.string() + "'");
  return load(in);
}

}  // namespace lrfnet
