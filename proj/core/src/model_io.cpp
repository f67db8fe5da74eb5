#include "hkl/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hkl/error.hpp"

namespace hkl {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_or_nan(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json labels_json(const std::vector<Label>& ls) {
  json a = json::array();
  for (const Label& l : ls) a.push_back(l);
  return a;
}

std::vector<Label> labels_from(const json& a) {
  std::vector<Label> out;
  for (const json& l : a) out.push_back(l.get<Label>());
  return out;
}

}  // namespace

std::string model_to_json(const HklModel& m, int indent) {
  if (!m.has_kernel_family) throw InvalidArgument("only kernel-family models can be serialized");
  json j;
  j["format"] = "hkl-model";
  j["version"] = 1;
  j["dag"] = {{"kind", to_string(m.dag_kind)}, {"p", m.p}, {"q", m.q}, {"beta", m.weights.beta}, {"d_r", m.weights.d_r}};
  j["kernel"] = {{"family", to_string(m.kernel)},
                 {"q", m.kernel_params.q},
                 {"a", number(m.kernel_params.a)},
                 {"b", number(m.kernel_params.b)},
                 {"alpha", number(m.kernel_params.alpha)}};
  j["loss"] = {{"kind", to_string(m.loss.kind())}, {"epsilon", m.loss.epsilon()}};
  j["lambda"] = m.lambda;
  j["eps_gap"] = m.eps_gap;
  j["W"] = labels_json(m.w);
  j["W_active"] = labels_json(m.w_active);
  j["eta"] = vector_json(m.eta);
  j["zeta"] = vector_json(m.zeta);
  j["alpha"] = vector_json(m.alpha);
  j["b"] = m.b;
  j["objective"] = m.objective;
  j["gap"] = m.gap;
  j["gap_certified"] = m.gap_certified;
  j["standardization"] = {{"mean", vector_json(m.standardizer.mean)}, {"scale", vector_json(m.standardizer.scale)}};
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.train_z.rows(); ++r) rows.push_back(vector_json(m.train_z.row(r).transpose()));
  j["train_inputs"] = rows;
  j["fitted"] = vector_json(m.fitted);
  return j.dump(indent);
}

HklModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "hkl-model") throw InvalidArgument("not an hkl model file");
    HklModel m;
    const json& d = j.at("dag");
    m.dag_kind = parse_dag_kind(d.at("kind").get<std::string>());
    m.p = d.at("p").get<int>();
    m.q = d.at("q").get<int>();
    m.weights.beta = d.at("beta").get<double>();
    m.weights.d_r = d.at("d_r").get<double>();
    const json& k = j.at("kernel");
    m.has_kernel_family = true;
    m.kernel = parse_kernel_kind(k.at("family").get<std::string>());
    m.kernel_params.q = k.at("q").get<int>();
    m.kernel_params.a = number_or_nan(k.at("a"));
    m.kernel_params.b = number_or_nan(k.at("b"));
    m.kernel_params.alpha = number_or_nan(k.at("alpha"));
    m.loss = Loss(parse_loss_kind(j.at("loss").at("kind").get<std::string>()), j.at("loss").at("epsilon").get<double>());
    m.lambda = j.at("lambda").get<double>();
    m.eps_gap = j.at("eps_gap").get<double>();
    m.w = labels_from(j.at("W"));
    m.w_active = labels_from(j.at("W_active"));
    m.eta = vector_from(j.at("eta"));
    m.zeta = vector_from(j.at("zeta"));
    m.alpha = vector_from(j.at("alpha"));
    m.b = j.at("b").get<double>();
    m.objective = j.at("objective").get<double>();
    m.gap = j.at("gap").get<double>();
    m.gap_certified = j.at("gap_certified").get<bool>();
    m.standardizer.mean = vector_from(j.at("standardization").at("mean"));
    m.standardizer.scale = vector_from(j.at("standardization").at("scale"));
    const json& rows = j.at("train_inputs");
    m.train_z.resize(static_cast<Eigen::Index>(rows.size()), m.p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(m.p)) throw InvalidArgument("train_inputs row has wrong length");
      for (int c = 0; c < m.p; ++c) m.train_z(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
    }
    m.fitted = vector_from(j.at("fitted"));
    if (m.w.size() != static_cast<std::size_t>(m.zeta.size()) || m.alpha.size() != m.train_z.rows())
      throw InvalidArgument("model JSON: inconsistent sizes");
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model JSON: ") + e.what());
  }
}

void save_model(const HklModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << model_to_json(model) << '\n';
  if (!out) throw Error("failed writing " + path);
}

HklModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace hkl
