#include "adrc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adrc/errors.hpp"

namespace adrc {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using EntryMap = std::map<std::string, Entry>;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> Tokens(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void Fail(const std::string& key, const Entry& e, const std::string& why) {
  throw Error(ErrorCode::kConfig, "line " + std::to_string(e.line) + " (" + key + "): " + why);
}

double ToDouble(const std::string& tok, const std::string& key, const Entry& e) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok[0] == '+') ++first;
  const auto res = std::from_chars(first, tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) Fail(key, e, "not a number: '" + tok + "'");
  return v;
}

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "scenario.name",
      "plant.a", "plant.b", "plant.A", "plant.B", "plant.C",
      "controller.type", "controller.K", "controller.G", "controller.b_hat", "controller.poles",
      "controller.split", "controller.split_indices", "controller.omega_c", "controller.omega_o",
      "controller.alpha", "controller.epsilon",
      "model.K_star", "model.G_star", "model.b_hat",
      "disturbance.d_ss", "disturbance.A_d", "disturbance.C_d", "disturbance.chi0",
      "sim.dt", "sim.T", "sim.sample_period", "sim.noise_variance", "sim.seed", "sim.lambda",
      "sim.x0", "sim.xhat0", "sim.dhat0",
      "output.csv", "output.summary",
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(EntryMap entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const Entry& entry(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorCode::kConfig, "missing key " + key);
    used_.insert(key);
    return it->second;
  }

  std::string String(const std::string& key) { return entry(key).value; }

  std::vector<double> Doubles(const std::string& key) {
    const Entry& e = entry(key);
    std::vector<double> out;
    for (const std::string& tok : Tokens(e.value)) out.push_back(ToDouble(tok, key, e));
    return out;
  }

  double Double(const std::string& key) {
    const std::vector<double> v = Doubles(key);
    if (v.size() != 1) Fail(key, entries_.at(key), "expected one number");
    return v[0];
  }

  std::optional<double> OptDouble(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Double(key);
  }

  std::vector<std::size_t> Indices(const std::string& key) {
    std::vector<std::size_t> out;
    const Entry& e = entry(key);
    for (const std::string& tok : Tokens(e.value)) {
      std::size_t v = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) Fail(key, e, "not an index: " + tok);
      out.push_back(v);
    }
    return out;
  }

  std::uint64_t Unsigned(const std::string& key) {
    const Entry& e = entry(key);
    const std::string v = Trim(e.value);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) Fail(key, e, "not an unsigned integer");
    return out;
  }

  [[noreturn]] void FailAt(const std::string& key, const std::string& why) { Fail(key, entries_.at(key), why); }

  // Keys present in the file that the chosen variants never looked at.
  void RejectUnused() const {
    for (const auto& [key, e] : entries_)
      if (!used_.count(key)) Fail(key, e, "key does not apply to this scenario");
  }

 private:
  EntryMap entries_;
  std::set<std::string> used_;
};

SplitPolicy ParseSplit(Reader& r) {
  SplitPolicy p;
  if (!r.has("controller.split")) return p;
  const std::string kind = Trim(r.String("controller.split"));
  if (kind == "slowest") {
    p.kind = SplitKind::kSlowestToController;
  } else if (kind == "fastest") {
    p.kind = SplitKind::kFastestToController;
  } else if (kind == "explicit") {
    p.kind = SplitKind::kExplicit;
    p.indices = r.Indices("controller.split_indices");
  } else {
    r.FailAt("controller.split", "unknown split policy '" + kind + "'");
  }
  return p;
}

ControllerSpec ParseController(Reader& r) {
  const std::string type = Trim(r.String("controller.type"));
  if (type == "gains") {
    return ExplicitGainsSpec{r.Doubles("controller.K"), r.Doubles("controller.G"), r.Double("controller.b_hat")};
  }
  if (type == "poles") {
    PolesSpec p;
    for (const std::string& tok : Tokens(r.String("controller.poles"))) {
      try {
        p.poles.push_back(ParseComplex(tok));
      } catch (const Error& e) {
        r.FailAt("controller.poles", e.what());
      }
    }
    p.b_hat = r.OptDouble("controller.b_hat");
    p.split = ParseSplit(r);
    return p;
  }
  if (type == "bandwidth") {
    return BandwidthSpec{r.Double("controller.omega_c"), r.Double("controller.omega_o"),
                         r.OptDouble("controller.b_hat")};
  }
  if (type == "high_gain") {
    return HighGainSpec{r.Doubles("controller.K"), r.Doubles("controller.alpha"), r.Double("controller.epsilon"),
                        r.OptDouble("controller.b_hat")};
  }
  r.FailAt("controller.type", "unknown controller type '" + type + "'");
}

void AppendLine(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += " = ";
  out += value;
  out += '\n';
}

std::string Join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += FormatDouble(v[i]);
  }
  return out;
}

Matrix SquareFromRowMajor(const std::vector<double>& v, const char* what) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n * n != static_cast<Eigen::Index>(v.size()) || n == 0)
    throw Error(ErrorCode::kConfig, std::string(what) + " must hold N*N row-major entries");
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
  return m;
}

Vector ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string FormatComplex(Complex c) {
  if (c.imag() == 0.0) return FormatDouble(c.real());
  std::string out = FormatDouble(c.real());
  if (!std::signbit(c.imag())) out += '+';
  out += FormatDouble(c.imag());
  out += 'i';
  return out;
}

Complex ParseComplex(const std::string& token) {
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw Error(ErrorCode::kConfig, "bad complex literal '" + token + "'");
    return v;
  };
  if (token.empty() || token.back() != 'i') return {number(token), 0.0};
  const std::string body = token.substr(0, token.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, number(body)};
  }
  std::string imag = body.substr(split);
  if (imag == "+" || imag == "-") imag += "1";
  return {number(body.substr(0, split)), number(imag)};
}

Scenario ParseScenario(std::istream& in) {
  EntryMap entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    if (!KnownKeys().count(key))
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (entries.count(key))
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    entries[key] = {Trim(line.substr(eq + 1)), line_no};
  }

  Reader r(std::move(entries));
  Scenario s;
  if (r.has("scenario.name")) s.name = Trim(r.String("scenario.name"));

  if (r.has("plant.A")) {
    s.plant = FullPlantSpec{r.Doubles("plant.A"), r.Doubles("plant.B"), r.Doubles("plant.C")};
  } else {
    s.plant = CanonicalPlantSpec{r.Doubles("plant.a"), r.Double("plant.b")};
  }

  if (r.has("controller.type")) s.controller = ParseController(r);

  if (r.has("model.K_star") || r.has("model.G_star")) {
    s.model = ModelBasedSpec{r.Doubles("model.K_star"), r.Doubles("model.G_star"), r.OptDouble("model.b_hat")};
  }

  if (r.has("disturbance.d_ss")) s.disturbance.d_ss = r.Double("disturbance.d_ss");
  if (r.has("disturbance.A_d")) {
    s.disturbance.A_d = r.Doubles("disturbance.A_d");
    s.disturbance.C_d = r.Doubles("disturbance.C_d");
    s.disturbance.chi0 = r.Doubles("disturbance.chi0");
  }

  SimSpec& sim = s.sim;
  if (r.has("sim.dt")) sim.dt = r.Double("sim.dt");
  if (r.has("sim.T")) sim.horizon = r.Double("sim.T");
  if (r.has("sim.sample_period")) {
    const std::string v = Trim(r.String("sim.sample_period"));
    if (v != "continuous") sim.sample_period = r.Double("sim.sample_period");
  }
  if (r.has("sim.noise_variance")) sim.noise_variance = r.Double("sim.noise_variance");
  if (r.has("sim.seed")) sim.seed = r.Unsigned("sim.seed");
  if (r.has("sim.lambda")) sim.lambda = r.Double("sim.lambda");
  if (r.has("sim.x0")) sim.x0 = r.Doubles("sim.x0");
  if (r.has("sim.xhat0")) sim.xhat0 = r.Doubles("sim.xhat0");
  if (r.has("sim.dhat0")) sim.dhat0 = r.Double("sim.dhat0");

  if (r.has("output.csv")) s.output.csv = Trim(r.String("output.csv"));
  if (r.has("output.summary")) s.output.summary = Trim(r.String("output.summary"));

  r.RejectUnused();
  return s;
}

Scenario ParseScenarioString(const std::string& text) {
  std::istringstream in(text);
  return ParseScenario(in);
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open scenario " + path.string());
  Scenario s = ParseScenario(in);
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

std::string DumpScenario(const Scenario& s) {
  std::string out;
  if (!s.name.empty()) AppendLine(out, "scenario.name", s.name);

  if (const auto* c = std::get_if<CanonicalPlantSpec>(&s.plant)) {
    AppendLine(out, "plant.a", Join(c->a));
    AppendLine(out, "plant.b", FormatDouble(c->b));
  } else {
    const auto& f = std::get<FullPlantSpec>(s.plant);
    AppendLine(out, "plant.A", Join(f.A));
    AppendLine(out, "plant.B", Join(f.B));
    AppendLine(out, "plant.C", Join(f.C));
  }

  if (s.controller) {
    std::visit(
        [&](const auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          auto b_hat = [&](const std::optional<double>& v) {
            if (v) AppendLine(out, "controller.b_hat", FormatDouble(*v));
          };
          if constexpr (std::is_same_v<T, ExplicitGainsSpec>) {
            AppendLine(out, "controller.type", "gains");
            AppendLine(out, "controller.K", Join(spec.K));
            AppendLine(out, "controller.G", Join(spec.G));
            AppendLine(out, "controller.b_hat", FormatDouble(spec.b_hat));
          } else if constexpr (std::is_same_v<T, PolesSpec>) {
            AppendLine(out, "controller.type", "poles");
            std::string poles;
            for (std::size_t i = 0; i < spec.poles.size(); ++i) poles += (i ? " " : "") + FormatComplex(spec.poles[i]);
            AppendLine(out, "controller.poles", poles);
            b_hat(spec.b_hat);
            AppendLine(out, "controller.split", SplitKindName(spec.split.kind));
            if (spec.split.kind == SplitKind::kExplicit) {
              std::string idx;
              for (std::size_t i = 0; i < spec.split.indices.size(); ++i)
                idx += (i ? " " : "") + std::to_string(spec.split.indices[i]);
              AppendLine(out, "controller.split_indices", idx);
            }
          } else if constexpr (std::is_same_v<T, BandwidthSpec>) {
            AppendLine(out, "controller.type", "bandwidth");
            AppendLine(out, "controller.omega_c", FormatDouble(spec.omega_c));
            AppendLine(out, "controller.omega_o", FormatDouble(spec.omega_o));
            b_hat(spec.b_hat);
          } else {
            AppendLine(out, "controller.type", "high_gain");
            AppendLine(out, "controller.K", Join(spec.K));
            AppendLine(out, "controller.alpha", Join(spec.alpha));
            AppendLine(out, "controller.epsilon", FormatDouble(spec.epsilon));
            b_hat(spec.b_hat);
          }
        },
        *s.controller);
  }

  if (s.model) {
    AppendLine(out, "model.K_star", Join(s.model->K_star));
    AppendLine(out, "model.G_star", Join(s.model->G_star));
    if (s.model->b_hat) AppendLine(out, "model.b_hat", FormatDouble(*s.model->b_hat));
  }

  AppendLine(out, "disturbance.d_ss", FormatDouble(s.disturbance.d_ss));
  if (!s.disturbance.A_d.empty()) {
    AppendLine(out, "disturbance.A_d", Join(s.disturbance.A_d));
    AppendLine(out, "disturbance.C_d", Join(s.disturbance.C_d));
    AppendLine(out, "disturbance.chi0", Join(s.disturbance.chi0));
  }

  const SimSpec& sim = s.sim;
  AppendLine(out, "sim.dt", FormatDouble(sim.dt));
  AppendLine(out, "sim.T", FormatDouble(sim.horizon));
  AppendLine(out, "sim.sample_period", sim.sample_period ? FormatDouble(*sim.sample_period) : "continuous");
  AppendLine(out, "sim.noise_variance", FormatDouble(sim.noise_variance));
  AppendLine(out, "sim.seed", std::to_string(sim.seed));
  AppendLine(out, "sim.lambda", FormatDouble(sim.lambda));
  if (!sim.x0.empty()) AppendLine(out, "sim.x0", Join(sim.x0));
  if (!sim.xhat0.empty()) AppendLine(out, "sim.xhat0", Join(sim.xhat0));
  AppendLine(out, "sim.dhat0", FormatDouble(sim.dhat0));

  if (!s.output.csv.empty()) AppendLine(out, "output.csv", s.output.csv);
  if (!s.output.summary.empty()) AppendLine(out, "output.summary", s.output.summary);
  return out;
}

CanonicalForm ResolvePlant(const PlantSpec& spec, const CanonicalizeOptions& opts) {
  if (const auto* c = std::get_if<CanonicalPlantSpec>(&spec)) {
    CanonicalForm form;
    form.plant.a = ToVector(c->a);
    form.plant.b = c->b;
    form.plant.Validate();
    const StateSpacePlant ss = form.plant.AsStateSpace();
    form.disturbance = ToCanonical(ss, opts).disturbance;
    return form;
  }
  const auto& f = std::get<FullPlantSpec>(spec);
  StateSpacePlant p;
  p.A = SquareFromRowMajor(f.A, "plant.A");
  p.B = ToVector(f.B);
  p.C = ToVector(f.C).transpose();
  p.Validate();
  return ToCanonical(p, opts);
}

ResolvedController ResolveController(const ControllerSpec& spec, const CanonicalPlant& plant) {
  const std::size_t rho = plant.rho();
  return std::visit(
      [&](const auto& c) -> ResolvedController {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ExplicitGainsSpec>) {
          AdrcGains g{ToVector(c.K), ToVector(c.G), c.b_hat};
          g.Validate();
          return {g, std::nullopt};
        } else if constexpr (std::is_same_v<T, PolesSpec>) {
          const double b_hat = c.b_hat.value_or(DefaultBHat(plant.b));
          SynthesisReport report = Synthesize(plant, b_hat, DesiredSpectrum::FromPoles(RootSet{c.poles}), c.split);
          AdrcGains g = report.gains;
          return {g, std::move(report)};
        } else if constexpr (std::is_same_v<T, BandwidthSpec>) {
          const BandwidthGains bw = BandwidthGainsFor(c.omega_c, c.omega_o, rho);
          return {AdrcGains{bw.K, bw.G, c.b_hat.value_or(DefaultBHat(plant.b))}, std::nullopt};
        } else {
          AdrcGains g{ToVector(c.K), HighGainObserver(ToVector(c.alpha), c.epsilon),
                      c.b_hat.value_or(DefaultBHat(plant.b))};
          g.Validate();
          return {g, std::nullopt};
        }
      },
      spec);
}

DisturbanceModel ResolveDisturbance(const DisturbanceSpec& spec) {
  DisturbanceModel d;
  d.d_ss = spec.d_ss;
  if (!spec.A_d.empty()) {
    LtiGenerator gen{SquareFromRowMajor(spec.A_d, "disturbance.A_d"), ToVector(spec.C_d).transpose(),
                     ToVector(spec.chi0)};
    d.generator = std::move(gen);
  }
  d.Validate();
  return d;
}

SimConfig ResolveSim(const SimSpec& spec, std::size_t rho) {
  SimConfig cfg;
  cfg.dt = spec.dt;
  cfg.horizon = spec.horizon;
  cfg.sample_period = spec.sample_period;
  cfg.noise_variance = spec.noise_variance;
  cfg.seed = spec.seed;
  cfg.lambda = spec.lambda;
  if (spec.x0.empty()) {
    cfg.x0 = Vector::Zero(static_cast<Eigen::Index>(rho));
    cfg.x0(0) = 1.0;
  } else {
    cfg.x0 = ToVector(spec.x0);
  }
  if (!spec.xhat0.empty()) cfg.xhat0 = ToVector(spec.xhat0);
  cfg.dhat0 = spec.dhat0;
  cfg.Validate(rho);
  return cfg;
}

}  // namespace adrc
