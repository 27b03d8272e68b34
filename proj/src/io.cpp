#include "activegp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "activegp/error.hpp"

namespace activegp {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

const char* const kCurveHeader =
    "iteration,n_samples,strategy,selected_point_id,mean_mad,max_mad,cv_mse,fit_loglik,wall_ms,stop_reason";

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, "not a number: '" + s + "'");
  }
  return x;
}

Json number_to_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double number_from_json(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::ConfigError, "expected a number, got " + j.dump());
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_to_json(v[i]));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i]);
  return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_to_json(m.row(r).transpose()));
  return a;
}

Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "expected an array of rows");
  if (j.empty()) return Eigen::MatrixXd(0, std::max<Eigen::Index>(cols, 0));
  const Eigen::VectorXd first = vector_from_json(j[0]);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r]);
    if (row.size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  if (cols >= 0 && m.cols() != cols) throw Error(ErrorCode::DimensionMismatch, "matrix has wrong width");
  return m;
}

Json dataset_to_json(const Dataset& d) {
  Json points = Json::array();
  for (int t = 0; t < d.k(); ++t) {
    points.push_back({{"force", vector_to_json(d.design.row(t).transpose())},
                      {"replicates", matrix_to_json(d.responses[static_cast<std::size_t>(t)])}});
  }
  return {{"q", d.q()},
          {"p", d.p()},
          {"bounds", {{"lo", vector_to_json(d.bounds.lo)}, {"hi", vector_to_json(d.bounds.hi)}}},
          {"points", points}};
}

Dataset dataset_from_json(const Json& j) {
  try {
    const int q = j.at("q").get<int>();
    const int p = j.at("p").get<int>();
    Bounds b{vector_from_json(j.at("bounds").at("lo")), vector_from_json(j.at("bounds").at("hi"))};
    const Json& pts = j.at("points");
    DesignMatrix design(static_cast<Eigen::Index>(pts.size()), q);
    std::vector<Eigen::MatrixXd> responses;
    for (std::size_t t = 0; t < pts.size(); ++t) {
      const Eigen::VectorXd f = vector_from_json(pts[t].at("force"));
      if (f.size() != q) throw Error(ErrorCode::DimensionMismatch, "force has wrong length");
      design.row(static_cast<Eigen::Index>(t)) = f.transpose();
      responses.push_back(matrix_from_json(pts[t].at("replicates"), p));
    }
    Dataset d = make_dataset(std::move(b), std::move(design), std::move(responses));
    validate_dataset(d);
    return d;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed dataset JSON: ") + e.what());
  }
}

Json model_spec_to_json(const ModelSpec& s) {
  return {{"variant", to_string(s.variant)},
          {"q", s.q},
          {"p", s.p},
          {"sigma_F", matrix_to_json(s.sigma_F)},
          {"weights", vector_to_json(s.weights)},
          {"isotropic", s.isotropic}};
}

ModelSpec model_spec_from_json(const Json& j) {
  try {
    ModelSpec s = ModelSpec::make(parse_model_variant(j.at("variant").get<std::string>()), j.at("q").get<int>(),
                                  j.at("p").get<int>());
    if (j.contains("sigma_F")) s.sigma_F = matrix_from_json(j.at("sigma_F"), s.q);
    if (j.contains("weights")) s.weights = vector_from_json(j.at("weights"));
    s.isotropic = j.value("isotropic", false);
    validate_model_spec(s);
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed model spec: ") + e.what());
  }
}

Json hyperparameters_to_json(const Hyperparameters& hp) {
  return {{"tau2", number_to_json(hp.tau2)},
          {"theta", vector_to_json(hp.theta)},
          {"sigma2", number_to_json(hp.sigma2)},
          {"phi2", number_to_json(hp.phi2)}};
}

Hyperparameters hyperparameters_from_json(const Json& j) {
  try {
    Hyperparameters hp;
    hp.tau2 = number_from_json(j.at("tau2"));
    hp.theta = vector_from_json(j.at("theta"));
    hp.sigma2 = number_from_json(j.at("sigma2"));
    hp.phi2 = number_from_json(j.value("phi2", Json(0.0)));
    return hp;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed hyperparameters: ") + e.what());
  }
}

Json model_to_json(const FittedModel& m) {
  Json outputs = Json::array();
  for (const auto& o : m.outputs) {
    outputs.push_back({{"S_hat", vector_to_json(o.S_hat)},
                       {"hyperparameters", hyperparameters_to_json(o.hp)},
                       {"log_likelihood", number_to_json(o.diagnostics.log_likelihood)},
                       {"jitter", number_to_json(o.diagnostics.jitter)},
                       {"restarts", o.diagnostics.restarts},
                       {"failed_restarts", o.diagnostics.failed_restarts},
                       {"evaluations", o.diagnostics.evaluations},
                       {"fixed_point_sweeps", o.diagnostics.fixed_point_sweeps},
                       {"fixed_point_converged", o.diagnostics.fixed_point_converged}});
  }
  return {{"spec", model_spec_to_json(m.spec)},
          {"data", dataset_to_json(m.data)},
          {"outputs", outputs},
          {"total_log_likelihood", number_to_json(m.total_log_likelihood())}};
}

FittedModel model_from_json(const Json& j) {
  try {
    const ModelSpec spec = model_spec_from_json(j.at("spec"));
    const Dataset d = dataset_from_json(j.at("data"));
    std::vector<Hyperparameters> hps;
    for (const auto& o : j.at("outputs")) hps.push_back(hyperparameters_from_json(o.at("hyperparameters")));
    return condition(spec, d, hps);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed model JSON: ") + e.what());
  }
}

Json oracle_to_json(const OracleSpec& o) {
  return {{"q", o.q},
          {"p", o.p},
          {"bounds", {{"lo", vector_to_json(o.bounds.lo)}, {"hi", vector_to_json(o.bounds.hi)}}},
          {"S_star", matrix_to_json(o.S_star)},
          {"tau2_star", number_to_json(o.tau2_star)},
          {"theta_star", vector_to_json(o.theta_star)},
          {"anchors", matrix_to_json(o.anchors)},
          {"anchor_values", matrix_to_json(o.anchor_values)},
          {"anchor_weights", matrix_to_json(o.anchor_weights)},
          {"sigma_F_star", matrix_to_json(o.sigma_F_star)},
          {"sigma_eps2_star", vector_to_json(o.sigma_eps2_star)},
          {"seed", o.seed},
          {"gp_enabled", o.gp_enabled}};
}

OracleSpec oracle_from_json(const Json& j) {
  try {
    OracleSpec o;
    o.q = j.at("q").get<int>();
    o.p = j.at("p").get<int>();
    o.bounds = Bounds{vector_from_json(j.at("bounds").at("lo")), vector_from_json(j.at("bounds").at("hi"))};
    validate_bounds(o.bounds);
    o.S_star = matrix_from_json(j.at("S_star"), o.p);
    o.tau2_star = number_from_json(j.at("tau2_star"));
    o.theta_star = vector_from_json(j.at("theta_star"));
    o.anchors = matrix_from_json(j.at("anchors"), o.q);
    o.anchor_values = matrix_from_json(j.at("anchor_values"), o.p);
    o.anchor_weights = matrix_from_json(j.at("anchor_weights"), o.p);
    o.sigma_F_star = matrix_from_json(j.at("sigma_F_star"), o.q);
    o.sigma_eps2_star = vector_from_json(j.at("sigma_eps2_star"));
    o.seed = j.at("seed").get<std::uint64_t>();
    o.gp_enabled = j.at("gp_enabled").get<bool>();
    if (o.S_star.rows() != o.q || o.theta_star.size() != o.q || o.sigma_F_star.rows() != o.q ||
        o.sigma_eps2_star.size() != o.p || o.anchor_values.rows() != o.anchors.rows() ||
        o.anchor_weights.rows() != o.anchors.rows() || o.bounds.dim() != o.q) {
      throw Error(ErrorCode::DimensionMismatch, "oracle JSON fields disagree on q, p or anchor count");
    }
    return o;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed oracle JSON: ") + e.what());
  }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_text(path, out);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) return {};
  const auto width = split(lines[0], ',').size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != width) throw Error(ErrorCode::DimensionMismatch, path + ": ragged CSV rows");
    for (std::size_t c = 0; c < width; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(cells[c]);
    }
  }
  return m;
}

std::string curve_to_csv(const LearningCurve& c) {
  std::string out = kCurveHeader;
  out += '\n';
  for (const auto& r : c.rows) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.n_samples) + ',' + to_string(r.strategy) + ',' +
           std::to_string(r.selected_point_id) + ',' + format_double(r.mean_mad) + ',' + format_double(r.max_mad) +
           ',' + format_double(r.cv_mse) + ',' + format_double(r.fit_loglik) + ',' + format_double(r.wall_ms) + ',' +
           to_string(r.stop_reason) + '\n';
  }
  return out;
}

LearningCurve curve_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kCurveHeader) throw Error(ErrorCode::ConfigError, "not a learning-curve CSV");
  LearningCurve c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 10) throw Error(ErrorCode::ConfigError, "learning-curve row has wrong column count");
    CurveRow r;
    r.iteration = std::stoi(cells[0]);
    r.n_samples = std::stoi(cells[1]);
    r.strategy = parse_strategy(cells[2]);
    r.selected_point_id = std::stoi(cells[3]);
    r.mean_mad = parse_double(cells[4]);
    r.max_mad = parse_double(cells[5]);
    r.cv_mse = parse_double(cells[6]);
    r.fit_loglik = parse_double(cells[7]);
    r.wall_ms = parse_double(cells[8]);
    r.stop_reason = parse_stop_reason(cells[9]);
    c.rows.push_back(r);
  }
  if (!c.rows.empty()) c.strategy = c.rows.front().strategy;
  return c;
}

void write_curve_csv(const std::string& path, const LearningCurve& c) { write_text(path, curve_to_csv(c)); }

LearningCurve read_curve_csv(const std::string& path) { return curve_from_csv(read_text(path)); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::ConfigError, "write failed for " + path);
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace activegp
