#include "layercon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "layercon/parallel.hpp"
#include "layercon/text.hpp"

namespace layercon {

namespace {

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t a = 0;
  while (true) {
    const std::size_t b = s.find(',', a);
    out.push_back(trim(s.substr(a, b == std::string_view::npos ? b : b - a)));
    if (b == std::string_view::npos) break;
    a = b + 1;
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> v;
  for (const auto& t : split_list(s)) v.push_back(parse_double(t));
  return v;
}

int parse_int(std::string_view s) {
  const long v = parse_long(s);
  if (v < -2147483647L || v > 2147483647L) throw ConfigError("integer out of range: " + trim(s));
  return static_cast<int>(v);
}

bool parse_bool(std::string_view s) {
  const std::string t = trim(s);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError("expected true or false, got '" + t + "'");
}

const char* basis_name(BasisChoice b) {
  switch (b) {
    case BasisChoice::unit: return "unit";
    case BasisChoice::porosity: return "porosity";
    default: return "auto";
  }
}

BasisChoice parse_basis(std::string_view s) {
  const std::string t = trim(s);
  if (t == "auto") return BasisChoice::automatic;
  if (t == "unit") return BasisChoice::unit;
  if (t == "porosity") return BasisChoice::porosity;
  throw ConfigError("unknown basis '" + t + "' (auto, unit, porosity)");
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::eigenmode: return "eigenmode";
    case InitialKind::random: return "random";
    case InitialKind::file: return "file";
    default: return "zero";
  }
}

InitialKind parse_initial(std::string_view s) {
  const std::string t = trim(s);
  if (t == "zero") return InitialKind::zero;
  if (t == "eigenmode") return InitialKind::eigenmode;
  if (t == "random") return InitialKind::random;
  if (t == "file") return InitialKind::file;
  throw ConfigError("unknown initial kind '" + t + "' (zero, eigenmode, random, file)");
}

std::string formats_text(const OutputSpec& o) {
  std::vector<std::string> f;
  if (o.csv) f.push_back("csv");
  if (o.vtk) f.push_back("vtk");
  if (o.checkpoint) f.push_back("checkpoint");
  if (f.empty()) return "none";
  std::string s = f[0];
  for (std::size_t i = 1; i < f.size(); ++i) s += ", " + f[i];
  return s;
}

void parse_formats(std::string_view s, OutputSpec& o) {
  o.csv = o.vtk = o.checkpoint = false;
  if (trim(s) == "none") return;
  for (const auto& t : split_list(s)) {
    if (t == "csv") o.csv = true;
    else if (t == "vtk") o.vtk = true;
    else if (t == "checkpoint") o.checkpoint = true;
    else throw ConfigError("unknown output format '" + t + "' (csv, vtk, checkpoint, none)");
  }
}

std::string fmt(double x) { return format_double(x); }

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define LC_DOUBLE(k, member) \
  Field { k, [](RunConfig& c, std::string_view v) { c.member = parse_double(v); }, \
          [](const RunConfig& c) { return fmt(c.member); } }
#define LC_INT(k, member) \
  Field { k, [](RunConfig& c, std::string_view v) { c.member = parse_int(v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); } }
#define LC_LONG(k, member) \
  Field { k, [](RunConfig& c, std::string_view v) { c.member = parse_long(v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); } }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      Field{"stack.interfaces",
            [](RunConfig& c, std::string_view v) { c.stack.interfaces = parse_doubles(v); },
            [](const RunConfig& c) { return join_doubles(c.stack.interfaces); }},
      LC_DOUBLE("stack.width", stack.width),
      LC_DOUBLE("constants.mu", constants.mu),
      LC_DOUBLE("constants.rho0", constants.rho0),
      LC_DOUBLE("constants.alpha", constants.alpha),
      LC_DOUBLE("constants.g", constants.g),
      LC_DOUBLE("boundary.C0", boundary.C0),
      LC_DOUBLE("boundary.C1", boundary.C1),
      LC_INT("resolution.Nx", resolution.nx),
      LC_INT("resolution.Kmax", resolution.kmax),
      Field{"resolution.nq",
            [](RunConfig& c, std::string_view v) {
              c.resolution.nq = trim(v) == "auto" ? 0 : parse_int(v);
              if (trim(v) != "auto" && c.resolution.nq <= 0) throw ConfigError("resolution.nq must be positive or auto");
            },
            [](const RunConfig& c) {
              return c.resolution.nq == 0 ? std::string("auto") : std::to_string(c.resolution.nq);
            }},
      LC_INT("resolution.elliptic_order", resolution.elliptic_order),
      LC_INT("resolution.elements_per_layer", resolution.elements_per_layer),
      Field{"resolution.basis",
            [](RunConfig& c, std::string_view v) { c.resolution.basis = parse_basis(v); },
            [](const RunConfig& c) { return std::string(basis_name(c.resolution.basis)); }},
      LC_DOUBLE("stepper.dt", stepper.dt),
      Field{"stepper.scheme",
            [](RunConfig& c, std::string_view v) { c.stepper.scheme = parse_scheme(trim(v)); },
            [](const RunConfig& c) { return std::string(scheme_name(c.stepper.scheme)); }},
      LC_DOUBLE("stepper.cfl", stepper.cfl_target),
      Field{"stepper.adaptive",
            [](RunConfig& c, std::string_view v) { c.stepper.adaptive = parse_bool(v); },
            [](const RunConfig& c) { return std::string(c.stepper.adaptive ? "true" : "false"); }},
      LC_DOUBLE("horizon.T_end", t_end),
      LC_LONG("output.cadence", output.cadence),
      Field{"output.directory", [](RunConfig& c, std::string_view v) { c.output.directory = trim(v); },
            [](const RunConfig& c) { return c.output.directory; }},
      Field{"output.formats", [](RunConfig& c, std::string_view v) { parse_formats(v, c.output); },
            [](const RunConfig& c) { return formats_text(c.output); }},
      LC_LONG("output.snapshot_every", output.snapshot_every),
      LC_LONG("output.checkpoint_every", output.checkpoint_every),
      Field{"initial.kind",
            [](RunConfig& c, std::string_view v) { c.initial.kind = parse_initial(v); },
            [](const RunConfig& c) { return std::string(initial_name(c.initial.kind)); }},
      LC_INT("initial.m", initial.m),
      LC_INT("initial.k", initial.k),
      LC_DOUBLE("initial.amplitude", initial.amplitude),
      Field{"initial.seed",
            [](RunConfig& c, std::string_view v) {
              const long s = parse_long(v);
              if (s < 0) throw ConfigError("initial.seed must be non-negative");
              c.initial.seed = static_cast<std::uint64_t>(s);
            },
            [](const RunConfig& c) { return std::to_string(c.initial.seed); }},
      LC_INT("initial.band", initial.band),
      Field{"initial.path", [](RunConfig& c, std::string_view v) { c.initial.path = trim(v); },
            [](const RunConfig& c) { return c.initial.path; }},
  };
  return f;
}

#undef LC_DOUBLE
#undef LC_INT
#undef LC_LONG

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, const Field*> table;
  for (const auto& f : fields()) table[f.key] = &f;
  std::set<std::string> seen;
  std::map<long, LayerParams> layers;
  bool have_interfaces = false;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'section.key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + "repeated key '" + key + "'");
    try {
      if (key.rfind("stack.layer.", 0) == 0) {
        const long j = parse_long(key.substr(12));
        if (j < 0) throw ConfigError("negative layer index");
        const auto v = parse_doubles(value);
        if (v.size() != 3) throw ConfigError("expected 'K, b, D'");
        layers[j] = LayerParams{v[0], v[1], v[2]};
        continue;
      }
      const auto it = table.find(key);
      if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
      it->second->set(c, value);
      if (key == "stack.interfaces") have_interfaces = true;
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }

  if (!have_interfaces) throw ConfigError("missing required key 'stack.interfaces'");
  if (c.stack.interfaces.size() < 2) throw ConfigError("stack.interfaces needs at least two values");
  const long need = static_cast<long>(c.stack.interfaces.size()) - 1;
  if (layers.empty()) throw ConfigError("missing required key 'stack.layer.0'");
  if (static_cast<long>(layers.size()) != need || layers.rbegin()->first != need - 1) {
    throw ConfigError("layer-count mismatch: " + std::to_string(need) + " interfaces intervals but " +
                      std::to_string(layers.size()) + " stack.layer entries (expected stack.layer.0 .. " +
                      std::to_string(need - 1) + ")");
  }
  for (const auto& [j, p] : layers) c.stack.layers.push_back(p);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

std::string emit_config(const RunConfig& c) {
  std::string out;
  for (const auto& f : fields()) {
    out += std::string(f.key) + " = " + f.get(c) + "\n";
    if (std::string_view(f.key) == "stack.width") {
      for (std::size_t j = 0; j < c.stack.layers.size(); ++j) {
        const auto& p = c.stack.layers[j];
        out += "stack.layer." + std::to_string(j) + " = " + join_doubles({p.K, p.b, p.D}) + "\n";
      }
    }
  }
  return out;
}

LayerStack build_stack(const StackSpec& spec) {
  return LayerStack::build(spec.interfaces, spec.layers, spec.width);
}

void validate(const RunConfig& c) {
  const LayerStack stack = build_stack(c.stack);
  c.constants.validate();
  c.boundary.validate();
  c.stepper.validate();
  const ResolutionSpec& r = c.resolution;
  const int layers = static_cast<int>(stack.layer_count());
  if (r.nx < 4 || r.nx % 2 != 0) throw ConfigError("inconsistent resolution: Nx must be even and >= 4");
  if (r.kmax < 1) throw ConfigError("inconsistent resolution: Kmax must be >= 1");
  if (r.nq < 0) throw ConfigError("inconsistent resolution: nq must be positive or auto");
  if (r.nq > 0 && r.kmax > r.nq * layers) {
    throw ConfigError("inconsistent resolution: Kmax = " + std::to_string(r.kmax) +
                      " exceeds the vertical quadrature capacity nq * layers = " +
                      std::to_string(r.nq * layers));
  }
  if (r.elliptic_order < 1 || r.elliptic_order > 4) {
    throw ConfigError("inconsistent resolution: elliptic_order must be in 1..4");
  }
  if (r.elements_per_layer < 1) throw ConfigError("inconsistent resolution: elements_per_layer must be >= 1");
  if (r.basis == BasisChoice::unit && !stack.uniform_porosity()) {
    throw ConfigError("resolution.basis = unit requires the same porosity b in every layer");
  }
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw ConfigError("horizon.T_end must be finite and >= 0");
  if (c.output.cadence < 1) throw ConfigError("output.cadence must be >= 1");
  if (c.output.snapshot_every < 0 || c.output.checkpoint_every < 0) {
    throw ConfigError("output.snapshot_every and output.checkpoint_every must be >= 0");
  }
  if (c.output.directory.empty()) throw ConfigError("output.directory must not be empty");
  const InitialSpec& ic = c.initial;
  const int mmax = r.nx / 3;
  if (ic.kind == InitialKind::eigenmode) {
    if (ic.m < 0 || ic.m > mmax) {
      throw ConfigError("initial.m must be in 0.." + std::to_string(mmax) + " (dealiased modes)");
    }
    if (ic.k < 1 || ic.k > r.kmax) throw ConfigError("initial.k must be in 1..Kmax");
  }
  if (ic.kind == InitialKind::random && ic.band < 0) throw ConfigError("initial.band must be >= 0");
  if (ic.kind == InitialKind::file && ic.path.empty()) throw ConfigError("initial.kind = file needs initial.path");
  if (!std::isfinite(ic.amplitude)) throw ConfigError("initial.amplitude must be finite");
}

double basis_gram_error(const std::vector<VerticalBasis>& bases, const LayerStack& stack, int nq,
                        BasisWeight weight) {
  const Grid g(stack, 4, nq);
  std::vector<double> rho(g.nz());
  for (std::size_t q = 0; q < g.nz(); ++q) rho[q] = layer_weight(stack.layer(g.node_layers()[q]), weight);
  std::vector<double> dev(bases.size(), 0.0);
  parallel_for(bases.size(), [&](std::size_t m) {
    const Traces t = bases[m].traces(g.z(), g.node_layers());
    const std::size_t K = t.modes;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = k; l < K; ++l) {
        double s = 0.0;
        for (std::size_t q = 0; q < g.nz(); ++q) s += g.weights()[q] * rho[q] * t.value(q, k) * t.value(q, l);
        dev[m] = std::max(dev[m], std::abs(s - (k == l ? 1.0 : 0.0)));
      }
    }
  });
  return *std::max_element(dev.begin(), dev.end());
}

Simulation Simulation::build(const RunConfig& config) {
  validate(config);
  Simulation s;
  s.config = config;
  const LayerStack stack = build_stack(config.stack);
  ResolutionSpec& r = s.config.resolution;

  BasisWeight weight = BasisWeight::unit;
  if (r.basis == BasisChoice::porosity) {
    weight = BasisWeight::porosity;
  } else if (r.basis == BasisChoice::automatic && !stack.uniform_porosity()) {
    weight = BasisWeight::porosity;
    s.warnings.push_back("porosity varies between layers: using the porosity-weighted basis");
  }

  const int layers = static_cast<int>(stack.layer_count());
  if (r.nq == 0) {
    const std::size_t modes = static_cast<std::size_t>(r.nx / 2);
    std::vector<VerticalBasis> bases(modes);
    parallel_for(modes, [&](std::size_t m) {
      const double kappa = 2.0 * M_PI * static_cast<double>(m) / stack.width();
      bases[m] = find_eigenpairs(stack, kappa, r.kmax, weight);
    });
    int nq = std::max(8, (2 * r.kmax + layers - 1) / layers);
    double err = basis_gram_error(bases, stack, nq, weight);
    while (err > 1e-12) {
      if (nq > 4096) throw ConfigError("no vertical quadrature up to nq = 4096 resolves Kmax basis functions");
      nq += std::max(4, nq / 4);
      err = basis_gram_error(bases, stack, nq, weight);
    }
    r.nq = nq;
  }

  const Grid grid(stack, r.nx, r.nq);
  s.space = std::make_unique<SpectralSpace>(grid, r.kmax, weight);
  if (s.space->quadrature_gram_error() > 1e-10) {
    s.warnings.push_back("vertical quadrature too coarse for Kmax: basis Gram error " +
                         format_double(s.space->quadrature_gram_error()) + " (raise resolution.nq)");
  }
  s.model = std::make_unique<DarcyModel>(*s.space, config.constants, config.boundary,
                                         ElementSpec{r.elliptic_order, r.elements_per_layer});
  return s;
}

FlowState Simulation::initial_state() const {
  const InitialSpec& ic = config.initial;
  const SpectralSpace& sp = *space;
  SpectralField f = sp.zeros();
  switch (ic.kind) {
    case InitialKind::zero:
      break;
    case InitialKind::eigenmode:
      // amplitude * cos(kappa x) v: the m > 0 coefficient pairs with its conjugate
      f.c(static_cast<std::size_t>(ic.m), static_cast<std::size_t>(ic.k - 1)) =
          ic.m == 0 ? ic.amplitude : 0.5 * ic.amplitude;
      f.nodal_valid = false;
      break;
    case InitialKind::random: {
      std::mt19937_64 rng(ic.seed);
      std::normal_distribution<double> n(0.0, 1.0);
      const std::size_t mtop = std::min<std::size_t>(static_cast<std::size_t>(ic.band), sp.grid().dealias_limit());
      const std::size_t ktop = std::min<std::size_t>(static_cast<std::size_t>(ic.band) + 1, sp.kmax());
      for (std::size_t m = 0; m <= mtop; ++m) {
        for (std::size_t k = 0; k < ktop; ++k) {
          const double a = ic.amplitude / ((1.0 + m) * (1.0 + k));
          const double re = a * n(rng);
          const double im = m == 0 ? 0.0 : a * n(rng);
          f.c(m, k) = {re, im};
        }
      }
      f.nodal_valid = false;
      break;
    }
    case InitialKind::file: {
      std::ifstream in(ic.path);
      if (!in) throw ConfigError("cannot read initial condition file '" + ic.path + "'");
      const Grid& g = sp.grid();
      std::vector<double> nodal;
      std::string tok;
      while (in >> tok) nodal.push_back(parse_double(tok));
      if (nodal.size() != g.size()) {
        throw ConfigError("initial condition file has " + std::to_string(nodal.size()) + " values, expected " +
                          std::to_string(g.size()) + " (Nx = " + std::to_string(g.nx()) + " per line, " +
                          std::to_string(g.nz()) + " lines)");
      }
      const std::size_t nx = static_cast<std::size_t>(g.nx());
      for (std::size_t q = 0; q < g.nz(); ++q) {
        const double lift = model->lift().value_in_layer(g.node_layers()[q], g.z()[q]);
        for (std::size_t i = 0; i < nx; ++i) nodal[q * nx + i] -= lift;
      }
      f = sp.from_nodal(std::move(nodal));
      break;
    }
  }
  return model->make_state(std::move(f));
}

}  // namespace layercon
