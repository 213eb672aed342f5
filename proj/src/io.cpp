#include "mafem/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace mafem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("key '" + key + "': invalid value '" + value + "', expected " + expected);
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    bad_value(key, v, "a finite number");
  }
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    bad_value(key, v, "an integer in int range");
  }
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

void require(bool ok, const std::string& key, const std::string& range) {
  if (!ok) throw ConfigError("key '" + key + "' out of range: must be " + range);
}

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "domain",   "n",         "theta",          "target_index", "eps",      "mu",
      "eig_tol",  "eig_shift", "max_dofs",       "max_levels",   "beta",     "reference",
      "ref_refinements", "num_eigs", "out_dir", "seed",         "write_vtk", "selftest"};
  return keys;
}

namespace {

void assign_value(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "domain") {
    if (v.empty()) bad_value(key, v, "cube, fichera or a mesh file path");
    c.domain = v;
  } else if (key == "n") {
    c.n = parse_int(key, v);
  } else if (key == "theta") {
    c.theta = parse_double(key, v);
  } else if (key == "target_index") {
    c.target_index = parse_int(key, v);
  } else if (key == "eps") {
    c.eps = parse_double(key, v);
  } else if (key == "mu") {
    c.mu = parse_double(key, v);
  } else if (key == "eig_tol") {
    c.eig_tol = parse_double(key, v);
  } else if (key == "eig_shift") {
    c.eig_shift = parse_double(key, v);
  } else if (key == "max_dofs") {
    c.max_dofs = parse_int(key, v);
  } else if (key == "max_levels") {
    c.max_levels = parse_int(key, v);
  } else if (key == "beta") {
    c.beta = parse_double(key, v);
  } else if (key == "reference") {
    if (v != "auto" && v != "none" && v != "analytic" && v != "fine") {
      bad_value(key, v, "auto, none, analytic or fine");
    }
    c.reference = v;
  } else if (key == "ref_refinements") {
    c.ref_refinements = parse_int(key, v);
  } else if (key == "num_eigs") {
    c.num_eigs = parse_int(key, v);
  } else if (key == "out_dir") {
    if (v.empty()) bad_value(key, v, "a directory path");
    c.out_dir = v;
  } else if (key == "seed") {
    c.seed = parse_u64(key, v);
  } else if (key == "write_vtk") {
    c.write_vtk = parse_bool(key, v);
  } else if (key == "selftest") {
    if (v != "off" && v != "fail") bad_value(key, v, "off or fail");
    c.selftest = v;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

} // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  RunConfig next = c;
  assign_value(next, key, value);
  validate_config(next);
  c = next;
}

void validate_config(const RunConfig& c) {
  require(c.n >= 1, "n", ">= 1");
  require(c.theta > 0.0 && c.theta <= 1.0, "theta", "in (0, 1]");
  require(c.target_index >= 1, "target_index", ">= 1");
  require(c.eps > 0.0, "eps", "> 0");
  require(c.mu > 0.0, "mu", "> 0");
  require(c.eig_tol > 0.0 && c.eig_tol <= 1e-2, "eig_tol", "in (0, 1e-2]");
  require(c.eig_shift >= 0.0, "eig_shift", ">= 0");
  require(c.max_dofs >= 1, "max_dofs", ">= 1");
  require(c.max_levels >= 0, "max_levels", ">= 0");
  require(c.beta > 0.0, "beta", "> 0");
  require(c.ref_refinements >= 1, "ref_refinements", ">= 1");
  require(c.num_eigs >= 1, "num_eigs", ">= 1");
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

RunConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "domain = " << c.domain << '\n'
     << "n = " << c.n << '\n'
     << "theta = " << fmt17(c.theta) << '\n'
     << "target_index = " << c.target_index << '\n'
     << "eps = " << fmt17(c.eps) << '\n'
     << "mu = " << fmt17(c.mu) << '\n'
     << "eig_tol = " << fmt17(c.eig_tol) << '\n'
     << "eig_shift = " << fmt17(c.eig_shift) << '\n'
     << "max_dofs = " << c.max_dofs << '\n'
     << "max_levels = " << c.max_levels << '\n'
     << "beta = " << fmt17(c.beta) << '\n'
     << "reference = " << c.reference << '\n'
     << "ref_refinements = " << c.ref_refinements << '\n'
     << "num_eigs = " << c.num_eigs << '\n'
     << "out_dir = " << c.out_dir << '\n'
     << "seed = " << c.seed << '\n'
     << "write_vtk = " << (c.write_vtk ? "true" : "false") << '\n'
     << "selftest = " << c.selftest << '\n';
}

Mesh make_initial_mesh(const RunConfig& cfg) {
  if (cfg.domain == "cube") return generate_cube(cfg.n);
  if (cfg.domain == "fichera") return generate_fichera(cfg.n);
  return read_mesh_file(cfg.domain);
}

Material make_material(const RunConfig& cfg) { return Material::uniform(cfg.eps, cfg.mu); }

ReferenceMode resolve_reference(const RunConfig& cfg) {
  if (cfg.reference == "none") return ReferenceMode::none;
  if (cfg.reference == "analytic") return ReferenceMode::analytic;
  if (cfg.reference == "fine") return ReferenceMode::fine;
  return cfg.domain == "cube" && cfg.target_index == 1 ? ReferenceMode::analytic
                                                       : ReferenceMode::none;
}

LoopConfig make_loop_config(const RunConfig& cfg) {
  validate_config(cfg);
  LoopConfig loop;
  loop.theta = cfg.theta;
  loop.target_index = cfg.target_index;
  loop.max_dofs = cfg.max_dofs;
  loop.max_levels = cfg.max_levels;
  loop.beta = cfg.beta;
  loop.eigen.tol = cfg.eig_tol;
  loop.eigen.seed = cfg.seed;
  loop.shift = cfg.eig_shift;
  loop.reference = resolve_reference(cfg);
  loop.ref_refinements = cfg.ref_refinements;
  return loop;
}

CellFields solution_fields(const Mesh& mesh, const EdgeSpace& space, const Vector& u,
                           const std::vector<double>& eta_sq) {
  const std::size_t nt = mesh.num_tets();
  if (u.size() != space.n_dofs) throw ArgumentError("solution_fields: length mismatch");
  if (!eta_sq.empty() && eta_sq.size() != nt) {
    throw ArgumentError("solution_fields: one indicator per tet expected");
  }
  CellFields f;
  f.eta_sq = eta_sq.empty() ? std::vector<double>(nt, 0.0) : eta_sq;
  f.curl_norm.resize(nt);
  f.u_barycenter.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const LinearField lf = element_field(mesh, space, u, static_cast<int>(t));
    Vec3 c = Vec3::Zero();
    for (int v : mesh.tets()[t].verts) c += mesh.vertices()[v];
    f.curl_norm[t] = lf.curl().norm();
    f.u_barycenter[t] = lf(0.25 * c);
  }
  return f;
}

void write_vtk(std::ostream& os, const Mesh& mesh, const CellFields& fields,
               const std::string& title) {
  const std::size_t nt = mesh.num_tets();
  if (fields.eta_sq.size() != nt || fields.curl_norm.size() != nt ||
      fields.u_barycenter.size() != nt) {
    throw ArgumentError("write_vtk: every field needs one entry per tet");
  }
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec3& x : mesh.vertices()) out << x(0) << ' ' << x(1) << ' ' << x(2) << '\n';
  out << "CELLS " << nt << ' ' << 5 * nt << '\n';
  for (const Tet& t : mesh.tets()) {
    out << 4 << ' ' << t.verts[0] << ' ' << t.verts[1] << ' ' << t.verts[2] << ' ' << t.verts[3]
        << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) out << "10\n";
  out << "CELL_DATA " << nt << '\n';
  out << "SCALARS eta_sq double 1\nLOOKUP_TABLE default\n";
  for (double v : fields.eta_sq) out << v << '\n';
  out << "SCALARS curl_norm double 1\nLOOKUP_TABLE default\n";
  for (double v : fields.curl_norm) out << v << '\n';
  out << "VECTORS u_h double\n";
  for (const Vec3& v : fields.u_barycenter) out << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
  os << out.str();
  if (!os) throw IoError("write_vtk: write failed");
}

void write_vtk_file(const std::string& path, const Mesh& mesh, const CellFields& fields,
                    const std::string& title) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_vtk(out, mesh, fields, title);
}

std::vector<double> read_vtk_cell_scalar(std::istream& is, const std::string& name) {
  std::string word;
  std::size_t ncells = 0;
  bool in_cell_data = false;
  while (is >> word) {
    if (word == "CELL_DATA") {
      if (!(is >> ncells)) throw IoError("read_vtk: bad CELL_DATA count");
      in_cell_data = true;
    } else if (word == "SCALARS" && in_cell_data) {
      std::string field, type, rest;
      is >> field >> type;
      std::getline(is, rest);
      std::string lookup, table;
      is >> lookup >> table;
      if (lookup != "LOOKUP_TABLE") throw IoError("read_vtk: missing LOOKUP_TABLE");
      std::vector<double> values(ncells);
      for (double& v : values) {
        std::string tok;
        if (!(is >> tok)) throw IoError("read_vtk: truncated scalar data");
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) {
          throw IoError("read_vtk: bad number '" + tok + "'");
        }
      }
      if (field == name) return values;
    }
  }
  throw IoError("read_vtk: no cell scalar named '" + name + "'");
}

void write_csv(std::ostream& os, const std::vector<AdaptRecord>& records) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << kCsvHeader << '\n';
  for (const AdaptRecord& r : records) {
    out << r.level << ',' << r.n_tets << ',' << r.n_dofs << ',' << r.lambda << ',' << r.eta_sq
        << ',' << r.n_marked << ',' << r.gap << ',' << r.xi_sq << ',' << r.seconds << '\n';
  }
  os << out.str();
  if (!os) throw IoError("write_csv: write failed");
}

void write_csv_file(const std::string& path, const std::vector<AdaptRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, records);
}

std::vector<AdaptRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kCsvHeader) throw IoError("read_csv: bad header");
  std::vector<AdaptRecord> records;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(trim(line));
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 9) {
      throw IoError("read_csv: line " + std::to_string(lineno) + ": expected 9 columns");
    }
    auto num = [&](const std::string& s) {
      // strtod accepts the "nan" written for unavailable values.
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || s.empty()) {
        throw IoError("read_csv: line " + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      return v;
    };
    AdaptRecord r;
    r.level = static_cast<int>(num(cols[0]));
    r.n_tets = static_cast<int>(num(cols[1]));
    r.n_dofs = static_cast<int>(num(cols[2]));
    r.lambda = num(cols[3]);
    r.eta_sq = num(cols[4]);
    r.n_marked = static_cast<int>(num(cols[5]));
    r.gap = num(cols[6]);
    r.xi_sq = num(cols[7]);
    r.seconds = num(cols[8]);
    records.push_back(r);
  }
  return records;
}

} // namespace mafem
