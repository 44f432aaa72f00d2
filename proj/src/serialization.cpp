#include "vrpe/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "vrpe/error.hpp"

namespace vrpe {

namespace {

template <typename T>
T field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw SerializationError(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception& e) {
    throw SerializationError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

Json matrix_to_json(const Matrix& A) {
  Json out = Json::array();
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) out.push_back(A(i, j));
  }
  return out;
}

Matrix matrix_from_json(const Json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows * cols) {
    throw SerializationError("matrix has " + std::to_string(j.size()) + " entries, expected " +
                             std::to_string(rows * cols));
  }
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) {
      const Json& x = j[static_cast<std::size_t>(i * cols + k)];
      if (!x.is_number()) throw SerializationError("matrix entry is not a number");
      A(i, k) = x.get<double>();
    }
  }
  return A;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw SerializationError("vector must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SerializationError("vector entry is not a number");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json instance_to_json(const MrpInstance& instance) {
  return Json{{"D", instance.num_states()},
              {"gamma", instance.gamma()},
              {"P", matrix_to_json(instance.P())},
              {"R", matrix_to_json(instance.R())}};
}

MrpInstance instance_from_json(const Json& j) {
  const auto D = field<Index>(j, "D");
  if (D <= 0) throw SerializationError("D must be positive");
  return MrpInstance(matrix_from_json(field<Json>(j, "P"), D, D), matrix_from_json(field<Json>(j, "R"), D, D),
                     field<double>(j, "gamma"));
}

Json features_to_json(const Matrix& Psi) {
  return Json{{"d", Psi.rows()}, {"D", Psi.cols()}, {"Psi", matrix_to_json(Psi)}};
}

Matrix features_from_json(const Json& j) {
  const auto d = field<Index>(j, "d");
  const auto D = field<Index>(j, "D");
  if (d <= 0 || D <= 0) throw SerializationError("feature dimensions must be positive");
  return matrix_from_json(field<Json>(j, "Psi"), d, D);
}

Json bundle_to_json(const CovarianceBundle& bundle) {
  const Index d = bundle.sigma.rows();
  return Json{{"kind", bundle.kind == CovarianceKind::Iid ? "iid" : "markov_stationary"},
              {"d", d},
              {"omega", vector_to_json(bundle.omega)},
              {"sigma", matrix_to_json(bundle.sigma)},
              {"M_tilde", matrix_to_json(bundle.M_tilde)},
              {"trace", bundle.trace_functional},
              {"truncation_lag", bundle.truncation_lag},
              {"truncation_error_bound", bundle.truncation_error_bound}};
}

CovarianceBundle bundle_from_json(const Json& j) {
  CovarianceBundle b;
  const auto kind = field<std::string>(j, "kind");
  if (kind == "iid") {
    b.kind = CovarianceKind::Iid;
  } else if (kind == "markov_stationary") {
    b.kind = CovarianceKind::MarkovStationary;
  } else {
    throw SerializationError("unknown covariance kind '" + kind + "'");
  }
  const auto d = field<Index>(j, "d");
  b.omega = vector_from_json(field<Json>(j, "omega"));
  b.sigma = matrix_from_json(field<Json>(j, "sigma"), d, d);
  b.M_tilde = matrix_from_json(field<Json>(j, "M_tilde"), d, d);
  b.trace_functional = field<double>(j, "trace");
  b.truncation_lag = field<int>(j, "truncation_lag");
  b.truncation_error_bound = field<double>(j, "truncation_error_bound");
  return b;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SerializationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SerializationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw SerializationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace vrpe
