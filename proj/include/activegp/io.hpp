#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "activegp/active.hpp"
#include "activegp/gp.hpp"
#include "activegp/oracle.hpp"

namespace activegp {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double ("nan", "inf", "-inf" for non-finite).
[[nodiscard]] std::string format_double(double x);
[[nodiscard]] double parse_double(const std::string& s);

// Non-finite doubles are stored as the strings "nan", "inf" and "-inf".
[[nodiscard]] Json number_to_json(double x);
[[nodiscard]] double number_from_json(const Json& j);
[[nodiscard]] Json vector_to_json(const Eigen::VectorXd& v);
[[nodiscard]] Eigen::VectorXd vector_from_json(const Json& j);
[[nodiscard]] Json matrix_to_json(const Eigen::MatrixXd& m);  // array of rows
[[nodiscard]] Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols = -1);

/// {"q", "p", "bounds": {"lo", "hi"}, "points": [{"force": [...], "replicates": [[...], ...]}]}
[[nodiscard]] Json dataset_to_json(const Dataset& d);
[[nodiscard]] Dataset dataset_from_json(const Json& j);

[[nodiscard]] Json model_spec_to_json(const ModelSpec& s);
[[nodiscard]] ModelSpec model_spec_from_json(const Json& j);

[[nodiscard]] Json hyperparameters_to_json(const Hyperparameters& hp);
[[nodiscard]] Hyperparameters hyperparameters_from_json(const Json& j);

/// Spec, data and per-output estimates. Reading it back reconditions on the stored
/// hyperparameters, which reproduces the predictor exactly.
[[nodiscard]] Json model_to_json(const FittedModel& m);
[[nodiscard]] FittedModel model_from_json(const Json& j);

[[nodiscard]] Json oracle_to_json(const OracleSpec& o);
[[nodiscard]] OracleSpec oracle_from_json(const Json& j);

/// Plain numeric CSV, no header.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd read_matrix_csv(const std::string& path);

[[nodiscard]] std::string curve_to_csv(const LearningCurve& c);
[[nodiscard]] LearningCurve curve_from_csv(const std::string& text);
void write_curve_csv(const std::string& path, const LearningCurve& c);
[[nodiscard]] LearningCurve read_curve_csv(const std::string& path);

[[nodiscard]] std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
[[nodiscard]] Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

}  // namespace activegp
