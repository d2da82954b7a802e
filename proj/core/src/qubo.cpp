#include "latdesign/qubo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "latdesign/errors.hpp"

namespace latdesign {

namespace {

std::string format_real(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

double parse_real(const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw IoError("qubo: malformed number '" + tok + "'");
  return v;
}

}  // namespace

void QuboWeights::validate() const {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !(b > 0.0)) {
    throw InvalidArgument("QUBO weights A1, A2 and B must be positive");
  }
}

QuboProblem::QuboProblem(std::size_t num_vars, std::vector<QuboTerm> terms, double offset)
    : num_vars_(num_vars), terms_(std::move(terms)), offset_(offset) {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& t = terms_[k];
    if (t.u > t.v || t.v >= num_vars_) throw InvalidArgument("QUBO term index out of range");
    if (t.coeff == 0.0) throw InvalidArgument("QUBO term with zero coefficient");
    if (k > 0) {
      const auto& prev = terms_[k - 1];
      if (std::tie(prev.u, prev.v) >= std::tie(t.u, t.v)) {
        throw InvalidArgument("QUBO terms must be sorted and unique");
      }
    }
  }
}

QuboProblem encode(const DeltaContactMap& dc, const EnergyMatrix& e, const Composition& comp,
                   const QuboWeights& w) {
  w.validate();
  const int d = e.alphabet_size();
  const std::size_t n = dc.size();
  if (comp.alphabet_size() != d) throw InvalidArgument("composition and energy matrix disagree on D");
  if (static_cast<std::size_t>(comp.total()) != n) {
    throw InvalidArgument("composition total does not match the chain length");
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
  auto add = [&](std::size_t u, std::size_t v, double c) {
    if (c == 0.0) return;
    if (u > v) std::swap(u, v);
    acc[{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)}] += c;
  };
  double offset = 0.0;

  // H_comp = A1 sum_m (sum_i q_im - N_m)^2, expanded with q^2 = q.
  for (int m = 1; m < d; ++m) {
    const double target = comp.counts[m];
    offset += w.a1 * target * target;
    for (std::size_t i = 0; i < n; ++i) {
      add(var_index(i, m, d), var_index(i, m, d), w.a1 * (1.0 - 2.0 * target));
      for (std::size_t j = i + 1; j < n; ++j) add(var_index(i, m, d), var_index(j, m, d), 2.0 * w.a1);
    }
  }

  // H_occ = A2 sum_i sum_{m != n} q_im q_in: each unordered clash appears twice.
  for (std::size_t i = 0; i < n; ++i) {
    for (int m = 1; m < d; ++m) {
      for (int k = m + 1; k < d; ++k) add(var_index(i, m, d), var_index(i, k, d), 2.0 * w.a2);
    }
  }

  // H_contact = B [ sum'_{ij} sum_{m,n>=2} q_im q_jn dC_ij alpha_mn
  //               + sum_{i != j} sum_{m>=2} q_im dC_ij gamma_m
  //               + sum'_{ij} dC_ij eps_11 ].
  auto alpha = [&](int m, int k) { return e(m, k) - e(m, 0) - e(k, 0) + e(0, 0); };
  auto gamma = [&](int m) { return e(m, 0) - e(0, 0); };
  std::vector<double> row_sum(n, 0.0);
  for (const auto& entry : dc.nonzero()) {
    offset += w.b * entry.value * e(0, 0);
    row_sum[entry.i] += entry.value;
    row_sum[entry.j] += entry.value;
    for (int m = 1; m < d; ++m) {
      for (int k = 1; k < d; ++k) {
        add(var_index(entry.i, m, d), var_index(entry.j, k, d), w.b * entry.value * alpha(m, k));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int m = 1; m < d; ++m) add(var_index(i, m, d), var_index(i, m, d), w.b * row_sum[i] * gamma(m));
  }

  std::vector<QuboTerm> terms;
  terms.reserve(acc.size());
  for (const auto& [key, coeff] : acc) {
    if (coeff != 0.0) terms.push_back({key.first, key.second, coeff});
  }
  return QuboProblem(n * static_cast<std::size_t>(d - 1), std::move(terms), offset);
}

std::optional<std::string> dominance_warning(const DeltaContactMap& dc, const EnergyMatrix& e,
                                             const QuboWeights& w) {
  double eps_scale = 0.0;
  for (double v : e.entries()) eps_scale = std::max(eps_scale, std::abs(v));
  double row_scale = 0.0;
  for (std::size_t i = 0; i < dc.size(); ++i) {
    double s = 0.0;
    for (double v : dc.row(i)) s += std::abs(v);
    row_scale = std::max(row_scale, s);
  }
  const double needed = 2.0 * w.b * eps_scale * row_scale;
  if (w.a1 >= needed && w.a2 >= needed) return std::nullopt;
  return "penalty weights A1=" + format_real(w.a1) + ", A2=" + format_real(w.a2) +
         " are below 2*B*max|dC eps| = " + format_real(needed) +
         "; penalty dominance is not guaranteed";
}

Assignment encode_assignment(const Sequence& s, int alphabet_size) {
  check_alphabet(alphabet_size);
  Assignment a(s.size() * static_cast<std::size_t>(alphabet_size - 1), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= alphabet_size) throw InvalidArgument("residue type outside alphabet");
    if (s[i] > 0) a[var_index(i, s[i], alphabet_size)] = 1;
  }
  return a;
}

DecodeReport decode(std::span<const std::uint8_t> a, const Composition& comp) {
  const int d = comp.alphabet_size();
  check_alphabet(d);
  const auto k = static_cast<std::size_t>(d - 1);
  if (a.size() % k != 0) throw InvalidArgument("assignment length is not a multiple of D - 1");
  const std::size_t n = a.size() / k;
  if (static_cast<std::size_t>(comp.total()) != n) {
    throw InvalidArgument("assignment length does not match the composition");
  }

  DecodeReport report;
  std::vector<int> observed(static_cast<std::size_t>(d), 0);
  std::vector<std::uint8_t> types(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int hot = 0;
    for (int m = 1; m < d; ++m) {
      if (a[var_index(i, m, d)]) {
        ++hot;
        ++observed[m];
        types[i] = static_cast<std::uint8_t>(m);
      }
    }
    if (hot == 0) ++observed[0];
    if (hot > 1) report.double_occupied.push_back(i);
  }
  report.composition_delta.resize(static_cast<std::size_t>(d));
  bool composition_ok = true;
  for (int m = 0; m < d; ++m) {
    report.composition_delta[m] = observed[m] - comp.counts[m];
    if (report.composition_delta[m] != 0) composition_ok = false;
  }
  if (report.double_occupied.empty() && composition_ok) report.sequence = Sequence(std::move(types));
  return report;
}

double qubo_energy(const QuboProblem& p, std::span<const std::uint8_t> a) {
  if (a.size() != p.num_vars()) throw InvalidArgument("assignment size does not match the QUBO");
  double total = p.offset();
  for (const auto& t : p.terms()) {
    if (a[t.u] && a[t.v]) total += t.coeff;
  }
  return total;
}

void write_qubo(std::ostream& out, const QuboProblem& p) {
  out << "qubo " << p.num_vars() << ' ' << p.terms().size() << ' ' << format_real(p.offset()) << '\n';
  for (const auto& t : p.terms()) out << t.u << ' ' << t.v << ' ' << format_real(t.coeff) << '\n';
}

QuboProblem read_qubo(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("qubo: missing header");
  std::istringstream header(line);
  std::string magic;
  std::size_t num_vars = 0;
  std::size_t num_terms = 0;
  std::string offset_tok;
  if (!(header >> magic >> num_vars >> num_terms >> offset_tok) || magic != "qubo") {
    throw IoError("qubo: malformed header '" + line + "'");
  }
  const double offset = parse_real(offset_tok);
  std::vector<QuboTerm> terms;
  terms.reserve(num_terms);
  for (std::size_t k = 0; k < num_terms; ++k) {
    if (!std::getline(in, line)) throw IoError("qubo: expected " + std::to_string(num_terms) + " terms");
    std::istringstream ss(line);
    QuboTerm t;
    std::string coeff_tok;
    if (!(ss >> t.u >> t.v >> coeff_tok)) throw IoError("qubo: malformed term '" + line + "'");
    t.coeff = parse_real(coeff_tok);
    terms.push_back(t);
  }
  try {
    return QuboProblem(num_vars, std::move(terms), offset);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("qubo: ") + e.what());
  }
}

void export_qubo(const QuboProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write QUBO file: " + path);
  write_qubo(out, p);
}

QuboProblem import_qubo(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open QUBO file: " + path);
  return read_qubo(in);
}

}  // namespace latdesign
