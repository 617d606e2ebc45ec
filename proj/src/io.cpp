#include "cmekit/io.hpp"

#include "cmekit/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace cmekit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::string csv_row(const std::vector<std::string> &fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    const std::string &f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      line += f;
      continue;
    }
    line += '"';
    for (char c : f) {
      if (c == '"') line += '"';
      line += c;
    }
    line += '"';
  }
  line += '\n';
  return line;
}

namespace {

double number(const json &j, const char *what) {
  if (!j.is_number()) throw InvalidSpec(std::string(what) + " must be a number");
  return j.get<double>();
}

Kernel parse_kernel(const json &j, const char *field) {
  if (!j.is_object() || !j.contains("variant") || !j["variant"].is_string())
    throw InvalidSpec(std::string(field) + " must be an object with a string \"variant\"");
  const auto variant = j["variant"].get<std::string>();
  auto get = [&](const char *key, double fallback) {
    return j.contains(key) ? number(j[key], key) : fallback;
  };
  if (variant == "gaussian") return Kernel::gaussian(get("lengthscale", 1.0));
  if (variant == "laplacian") return Kernel::laplacian(get("lengthscale", 1.0));
  if (variant == "polynomial") {
    const double degree = get("degree", 2.0);
    if (degree != static_cast<int>(degree)) throw InvalidSpec("polynomial degree must be an integer");
    return Kernel::polynomial(static_cast<int>(degree), get("offset", 1.0));
  }
  if (variant == "linear") return Kernel::linear();
  if (variant == "delta") return Kernel::delta();
  throw InvalidSpec(std::string(field) + ": unknown kernel variant \"" + variant + "\"");
}

ordered_json kernel_json(const Kernel &k) {
  return std::visit(
      [](const auto &v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianKernel>)
          return {{"variant", "gaussian"}, {"lengthscale", v.lengthscale}};
        else if constexpr (std::is_same_v<T, LaplacianKernel>)
          return {{"variant", "laplacian"}, {"lengthscale", v.lengthscale}};
        else if constexpr (std::is_same_v<T, PolynomialKernel>)
          return {{"variant", "polynomial"}, {"degree", v.degree}, {"offset", v.offset}};
        else if constexpr (std::is_same_v<T, LinearKernel>)
          return {{"variant", "linear"}};
        else
          return {{"variant", "delta"}};
      },
      k.variant());
}

std::vector<Label> parse_labels(const json &j, const char *field) {
  if (!j.is_array()) throw InvalidSpec(std::string(field) + " must be an array");
  std::vector<Label> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json &e = j[i];
    if (e.is_string()) {
      Vector v(1);
      v(0) = static_cast<double>(i);
      out.push_back({e.get<std::string>(), v});
    } else if (e.is_object() && e.contains("name") && e["name"].is_string()) {
      Vector v;
      if (!e.contains("embedding")) {
        v.resize(1);
        v(0) = static_cast<double>(i);
      } else if (e["embedding"].is_number()) {
        v.resize(1);
        v(0) = e["embedding"].get<double>();
      } else if (e["embedding"].is_array()) {
        v.resize(static_cast<Eigen::Index>(e["embedding"].size()));
        for (std::size_t k = 0; k < e["embedding"].size(); ++k)
          v(static_cast<Eigen::Index>(k)) = number(e["embedding"][k], "embedding entry");
      } else {
        throw InvalidSpec(std::string(field) + ": embedding must be a number or an array");
      }
      out.push_back({e["name"].get<std::string>(), v});
    } else {
      throw InvalidSpec(std::string(field) + " entries must be strings or {name, embedding}");
    }
  }
  return out;
}

ordered_json labels_json(const std::vector<Label> &labels) {
  auto arr = ordered_json::array();
  for (const auto &l : labels) {
    auto emb = ordered_json::array();
    for (Eigen::Index i = 0; i < l.embedding.size(); ++i) emb.push_back(l.embedding(i));
    arr.push_back({{"name", l.name}, {"embedding", emb}});
  }
  return arr;
}

const json &require(const json &j, const char *key) {
  if (!j.contains(key)) throw InvalidSpec(std::string("missing field \"") + key + "\"");
  return j[key];
}

} // namespace

JointSpec parse_joint_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw InvalidSpec(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidSpec("joint spec must be a JSON object");

  auto x = parse_labels(require(j, "x_labels"), "x_labels");
  auto y = parse_labels(require(j, "y_labels"), "y_labels");
  const json &pj = require(j, "p");
  if (!pj.is_array()) throw InvalidSpec("p must be an array of rows");
  const auto m = static_cast<Eigen::Index>(pj.size());
  const auto q = m > 0 && pj[0].is_array() ? static_cast<Eigen::Index>(pj[0].size()) : 0;
  Matrix p(m, q);
  for (Eigen::Index i = 0; i < m; ++i) {
    const json &row = pj[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != q)
      throw InvalidSpec("p must be a rectangular array of rows");
    for (Eigen::Index k = 0; k < q; ++k) p(i, k) = number(row[static_cast<std::size_t>(k)], "p entry");
  }
  const Kernel kx = parse_kernel(require(j, "kernel_x"), "kernel_x");
  const Kernel ky = parse_kernel(require(j, "kernel_y"), "kernel_y");
  return JointSpec{FiniteJoint(std::move(x), std::move(y), std::move(p)), kx, ky};
}

JointSpec read_joint_spec(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open spec file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_joint_spec(buf.str());
}

std::string joint_spec_to_json(const JointSpec &spec) {
  ordered_json j;
  j["x_labels"] = labels_json(spec.joint.x_labels());
  j["y_labels"] = labels_json(spec.joint.y_labels());
  auto p = ordered_json::array();
  for (Eigen::Index i = 0; i < spec.joint.m(); ++i) {
    auto row = ordered_json::array();
    for (Eigen::Index k = 0; k < spec.joint.q(); ++k) row.push_back(spec.joint.p()(i, k));
    p.push_back(std::move(row));
  }
  j["p"] = std::move(p);
  j["kernel_x"] = kernel_json(spec.kernel_x);
  j["kernel_y"] = kernel_json(spec.kernel_y);
  return j.dump(2) + "\n";
}

void write_samples_csv(std::ostream &out, const SampleSet &samples, const FiniteJoint &joint) {
  out << "x_label,y_label\n";
  for (std::size_t j = 0; j < samples.size(); ++j)
    out << csv_row({joint.x_labels()[static_cast<std::size_t>(samples.x[j])].name,
                    joint.y_labels()[static_cast<std::size_t>(samples.y[j])].name});
}

SampleSet read_samples_csv(std::istream &in, const FiniteJoint &joint) {
  std::unordered_map<std::string, std::int32_t> xi, yi;
  for (std::size_t i = 0; i < joint.x_labels().size(); ++i)
    xi[joint.x_labels()[i].name] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < joint.y_labels().size(); ++i)
    yi[joint.y_labels()[i].name] = static_cast<std::int32_t>(i);

  std::string line;
  if (!std::getline(in, line) || line != "x_label,y_label")
    throw InvalidSpec("sample CSV must start with the header x_label,y_label");
  SampleSet s;
  s.generator = "file";
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw InvalidSpec("sample CSV line " + std::to_string(lineno) + ": expected two fields");
    const auto a = xi.find(line.substr(0, comma));
    const auto b = yi.find(line.substr(comma + 1));
    if (a == xi.end() || b == yi.end())
      throw InvalidSpec("sample CSV line " + std::to_string(lineno) + ": unknown label");
    s.x.push_back(a->second);
    s.y.push_back(b->second);
  }
  return s;
}

std::string sample_manifest_json(const SampleSet &samples) {
  ordered_json j;
  j["seed"] = samples.seed;
  j["generator"] = samples.generator;
  j["count"] = samples.size();
  j["columns"] = {"x_label", "y_label"};
  return j.dump(2) + "\n";
}

} // namespace cmekit
