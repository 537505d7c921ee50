#include "smoothot/measure_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "smoothot/errors.hpp"

namespace smoothot {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

double read_number(const nlohmann::json& j, const std::string& pointer) {
  if (!j.is_number()) throw ParseError(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(pointer, "number is not finite");
  return v;
}

}  // namespace

DiscreteMeasure measure_from_json(const nlohmann::json& j, const ParseOptions& opts) {
  if (!j.is_object()) throw ParseError("", "expected an object");
  if (!j.contains("dim")) throw ParseError("/dim", "missing field");
  if (!j.at("dim").is_number_integer() || j.at("dim").get<long long>() < 1) {
    throw ParseError("/dim", "expected a positive integer");
  }
  const auto dim = static_cast<std::size_t>(j.at("dim").get<long long>());
  if (!j.contains("atoms")) throw ParseError("/atoms", "missing field");
  const auto& atoms_json = j.at("atoms");
  if (!atoms_json.is_array() || atoms_json.empty()) {
    throw ParseError("/atoms", "expected a non-empty array");
  }

  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_json.size(); ++i) {
    const std::string base = "/atoms/" + std::to_string(i);
    const auto& a = atoms_json[i];
    if (!a.is_object()) throw ParseError(base, "expected an object");
    if (!a.contains("x")) throw ParseError(base + "/x", "missing field");
    if (!a.contains("w")) throw ParseError(base + "/w", "missing field");
    const auto& xj = a.at("x");
    if (!xj.is_array()) throw ParseError(base + "/x", "expected an array");
    if (xj.size() != dim) {
      throw ParseError(base + "/x", "expected " + std::to_string(dim) + " coordinates");
    }
    Atom atom;
    for (std::size_t k = 0; k < dim; ++k) {
      atom.x.push_back(read_number(xj[k], base + "/x/" + std::to_string(k)));
    }
    atom.w = read_number(a.at("w"), base + "/w");
    if (!(atom.w > 0.0)) throw ParseError(base + "/w", "weight must be positive");
    total += atom.w;
    atoms.push_back(std::move(atom));
  }

  if (std::abs(total - 1.0) > kWeightSumTolerance && !opts.renormalize) {
    std::ostringstream msg;
    msg << "weights sum to " << total << " (use --renormalize to rescale)";
    throw ParseError("/atoms", msg.str());
  }
  // Sums already within the measure's own 1e-12 invariant pass through untouched
  // so canonical files round-trip bit for bit.
  if (std::abs(total - 1.0) > 1e-12) {
    for (auto& a : atoms) a.w /= total;
  }
  return DiscreteMeasure(dim, std::move(atoms));
}

nlohmann::json measure_to_json(const DiscreteMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms()) {
    atoms.push_back({{"x", a.x}, {"w", a.w}});
  }
  return {{"dim", m.dim()}, {"atoms", atoms}};
}

std::string dump_measure(const DiscreteMeasure& m) { return measure_to_json(m).dump(2); }

DiscreteMeasure read_measure(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  return measure_from_json(j, opts);
}

void write_measure(const DiscreteMeasure& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << dump_measure(m) << '\n';
}

}  // namespace smoothot
