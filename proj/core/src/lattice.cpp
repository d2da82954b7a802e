#include "latdesign/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "latdesign/errors.hpp"

namespace latdesign {

// Builds conformations that are valid by construction (enumeration, symmetry
// images, Markov moves) without re-running validation.
class ChainBuilder {
 public:
  static Conformation make(int side, std::vector<Site> sites) {
    return Conformation(Conformation::Unchecked{}, side, std::move(sites));
  }
};

namespace {

int side_for(std::size_t n) {
  const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return static_cast<std::size_t>(side) * static_cast<std::size_t>(side) == n ? side : -1;
}

bool unit_step(const Site& a, const Site& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

Site transform_site(Site s, int side, int op) {
  if (op & 4) std::swap(s.x, s.y);
  if (op & 2) s.x = side - 1 - s.x;
  if (op & 1) s.y = side - 1 - s.y;
  return s;
}

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

// Depth-first Hamiltonian path search with connectivity and dead-end pruning.
class PathSearch {
 public:
  explicit PathSearch(int side)
      : side_(side), n_(side * side), visited_(n_, 0), stamp_(n_, 0), stack_(n_) {}

  /// With `minimal_starts`, only starts that are lexicographically minimal in
  /// their point-symmetry orbit are searched (a necessary condition for a
  /// canonical path).
  std::vector<Conformation> run(bool minimal_starts) {
    path_.reserve(n_);
    for (int start = 0; start < n_; ++start) {
      if (minimal_starts && !minimal_in_orbit(start)) continue;
      path_.assign(1, start);
      visited_[start] = 1;
      extend();
      visited_[start] = 0;
    }
    return std::move(out_);
  }

 private:
  int cell(int x, int y) const { return y * side_ + x; }

  bool minimal_in_orbit(int c) const {
    const Site s{c % side_, c / side_};
    for (int op = 1; op < 8; ++op) {
      if (transform_site(s, side_, op) < s) return false;
    }
    return true;
  }

  void extend() {
    if (static_cast<int>(path_.size()) == n_) {
      std::vector<Site> sites;
      sites.reserve(n_);
      for (int c : path_) sites.push_back({c % side_, c / side_});
      out_.push_back(ChainBuilder::make(side_, std::move(sites)));
      return;
    }
    const int head = path_.back();
    const int hx = head % side_;
    const int hy = head / side_;
    for (int d = 0; d < 4; ++d) {
      const int nx = hx + kDx[d];
      const int ny = hy + kDy[d];
      if (nx < 0 || ny < 0 || nx >= side_ || ny >= side_) continue;
      const int next = cell(nx, ny);
      if (visited_[next]) continue;
      visited_[next] = 1;
      path_.push_back(next);
      if (viable()) extend();
      path_.pop_back();
      visited_[next] = 0;
    }
  }

  // The unvisited cells must form one region reachable from the head, and at
  // most one of them may be a forced endpoint (degree <= 1 counting the head).
  bool viable() {
    const int remaining = n_ - static_cast<int>(path_.size());
    if (remaining == 0) return true;
    const int head = path_.back();
    ++epoch_;
    int top = 0;
    int reached = 0;
    int endpoints = 0;
    const int hx = head % side_;
    const int hy = head / side_;
    for (int d = 0; d < 4; ++d) {
      const int nx = hx + kDx[d];
      const int ny = hy + kDy[d];
      if (nx < 0 || ny < 0 || nx >= side_ || ny >= side_) continue;
      const int c = cell(nx, ny);
      if (!visited_[c] && stamp_[c] != epoch_) {
        if (reached > 0) {
          // A second unvisited neighbour of the head is fine only if it is
          // in the same region; the flood fill below settles that.
          continue;
        }
        stamp_[c] = epoch_;
        stack_[top++] = c;
        ++reached;
      }
    }
    if (reached == 0) return false;
    while (top > 0) {
      const int c = stack_[--top];
      const int cx = c % side_;
      const int cy = c / side_;
      int degree = 0;
      for (int d = 0; d < 4; ++d) {
        const int nx = cx + kDx[d];
        const int ny = cy + kDy[d];
        if (nx < 0 || ny < 0 || nx >= side_ || ny >= side_) continue;
        const int m = cell(nx, ny);
        if (m == head) {
          ++degree;
          continue;
        }
        if (visited_[m]) continue;
        ++degree;
        if (stamp_[m] != epoch_) {
          stamp_[m] = epoch_;
          stack_[top++] = m;
          ++reached;
        }
      }
      if (degree <= 1 && ++endpoints > 1) return false;
    }
    return reached == remaining;
  }

  int side_;
  int n_;
  std::vector<char> visited_;
  std::vector<unsigned> stamp_;
  std::vector<int> stack_;
  unsigned epoch_ = 0;
  std::vector<int> path_;
  std::vector<Conformation> out_;
};

// True iff no symmetry image of `sites` is lexicographically smaller.
bool is_canonical(std::span<const Site> sites, int side, Symmetry symmetry) {
  const std::size_t n = sites.size();
  const int passes = symmetry == Symmetry::point_and_reversal ? 2 : 1;
  for (int r = 0; r < passes; ++r) {
    for (int op = 0; op < 8; ++op) {
      if (op == 0 && r == 0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const Site img = transform_site(sites[r == 1 ? n - 1 - i : i], side, op);
        if (img < sites[i]) return false;
        if (sites[i] < img) break;
      }
    }
  }
  return true;
}

void check_side(int side, const EnumerationOptions& opts) {
  if (side < 2) throw InvalidArgument("lattice side must be >= 2, got " + std::to_string(side));
  if (side > opts.max_side && !opts.allow_large) {
    throw ResourceLimitError("exhaustive enumeration capped at side " +
                                 std::to_string(opts.max_side) + ", got " + std::to_string(side),
                             static_cast<std::uint64_t>(side));
  }
}

}  // namespace

bool is_compact_chain(std::span<const Site> sites, int side) {
  if (side < 1 || sites.size() != static_cast<std::size_t>(side) * side) return false;
  std::vector<char> seen(sites.size(), 0);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Site& s = sites[i];
    if (s.x < 0 || s.y < 0 || s.x >= side || s.y >= side) return false;
    auto& slot = seen[static_cast<std::size_t>(s.y) * side + s.x];
    if (slot) return false;
    slot = 1;
    if (i > 0 && !unit_step(sites[i - 1], s)) return false;
  }
  return true;
}

Conformation::Conformation(std::vector<Site> sites) : side_(side_for(sites.size())) {
  if (side_ < 1 || !is_compact_chain(sites, side_)) {
    throw InvalidArgument("not a compact chain on a square grid (" +
                          std::to_string(sites.size()) + " sites)");
  }
  sites_ = std::move(sites);
}

Conformation Conformation::reversed() const {
  return Conformation(Unchecked{}, side_, std::vector<Site>(sites_.rbegin(), sites_.rend()));
}

Conformation apply_symmetry(const Conformation& c, int op, bool reverse) {
  std::vector<Site> out;
  out.reserve(c.size());
  if (reverse) {
    for (auto it = c.sites_.rbegin(); it != c.sites_.rend(); ++it) {
      out.push_back(transform_site(*it, c.side_, op));
    }
  } else {
    for (const Site& s : c.sites_) out.push_back(transform_site(s, c.side_, op));
  }
  return Conformation(Conformation::Unchecked{}, c.side_, std::move(out));
}

Conformation canonical_form(const Conformation& c) {
  return canonical_form(c, Symmetry::point_and_reversal);
}

Conformation canonical_form(const Conformation& c, Symmetry symmetry) {
  Conformation best = c;
  const int passes = symmetry == Symmetry::point_and_reversal ? 2 : 1;
  for (int r = 0; r < passes; ++r) {
    for (int op = 0; op < 8; ++op) {
      if (op == 0 && r == 0) continue;
      Conformation image = apply_symmetry(c, op, r == 1);
      if (image < best) best = std::move(image);
    }
  }
  return best;
}

std::vector<Conformation> enumerate_directed_paths(int side, const EnumerationOptions& opts) {
  check_side(side, opts);
  return PathSearch(side).run(false);
}

std::vector<Conformation> enumerate_compact_conformations(int side,
                                                          const EnumerationOptions& opts) {
  check_side(side, opts);
  std::vector<Conformation> all = PathSearch(side).run(true);
  std::vector<Conformation> reps;
  for (auto& c : all) {
    if (is_canonical(c.sites(), side, opts.symmetry)) reps.push_back(std::move(c));
  }
  std::sort(reps.begin(), reps.end());
  return reps;
}

Conformation serpentine(int side) {
  if (side < 1) throw InvalidArgument("lattice side must be positive");
  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y) {
    for (int i = 0; i < side; ++i) sites.push_back({y % 2 == 0 ? i : side - 1 - i, y});
  }
  return ChainBuilder::make(side, std::move(sites));
}

std::vector<Conformation> sample_compact_conformations(int side, std::size_t count,
                                                       std::uint64_t seed,
                                                       std::size_t sweeps_between) {
  if (side < 2) throw InvalidArgument("lattice side must be >= 2");
  const int n = side * side;
  const Conformation start = serpentine(side);
  std::vector<Site> path(start.sites().begin(), start.sites().end());
  std::vector<int> index(n);
  auto refresh = [&](int from, int to) {
    for (int k = from; k <= to; ++k) index[path[k].y * side + path[k].x] = k;
  };
  refresh(0, n - 1);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 7);
  auto backbite = [&] {
    const int r = pick(rng);
    const bool tail = (r & 4) != 0;
    const int end = tail ? n - 1 : 0;
    const Site e = path[end];
    const Site nb{e.x + kDx[r & 3], e.y + kDy[r & 3]};
    if (nb.x < 0 || nb.y < 0 || nb.x >= side || nb.y >= side) return;
    const int k = index[nb.y * side + nb.x];
    if (tail) {
      if (k == n - 2) return;
      std::reverse(path.begin() + k + 1, path.end());
      refresh(k + 1, n - 1);
    } else {
      if (k == 1) return;
      std::reverse(path.begin(), path.begin() + k);
      refresh(0, k - 1);
    }
  };

  // Burn-in before the first recorded sample.
  for (std::size_t s = 0; s < 50 * static_cast<std::size_t>(n); ++s) backbite();
  std::vector<Conformation> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t s = 0; s < sweeps_between * static_cast<std::size_t>(n); ++s) backbite();
    out.push_back(ChainBuilder::make(side, path));
  }
  return out;
}

ContactMap::ContactMap(const Conformation& c) : n_(c.size()), bits_(n_ * n_, 0) {
  const int side = c.side();
  std::vector<int> at(n_);
  for (std::size_t i = 0; i < n_; ++i) at[static_cast<std::size_t>(c[i].y) * side + c[i].x] = static_cast<int>(i);
  for (std::size_t i = 0; i < n_; ++i) {
    const Site s = c[i];
    // Right and up neighbours visit every lattice edge once.
    const Site nbs[2] = {{s.x + 1, s.y}, {s.x, s.y + 1}};
    for (const Site& t : nbs) {
      if (t.x >= side || t.y >= side) continue;
      const auto j = static_cast<std::size_t>(at[static_cast<std::size_t>(t.y) * side + t.x]);
      const std::size_t lo = std::min(i, j);
      const std::size_t hi = std::max(i, j);
      if (hi - lo <= 1) continue;
      bits_[lo * n_ + hi] = bits_[hi * n_ + lo] = 1;
      pairs_.emplace_back(static_cast<std::uint16_t>(lo), static_cast<std::uint16_t>(hi));
    }
  }
  std::sort(pairs_.begin(), pairs_.end());
}

AverageContactMap::AverageContactMap(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) throw InvalidArgument("average contact map must be n x n");
}

AverageContactMap average_contact_map(std::span<const ContactMap> maps) {
  if (maps.empty()) throw InvalidArgument("average contact map of an empty database");
  const std::size_t n = maps.front().size();
  std::vector<double> sum(n * n, 0.0);
  for (const auto& m : maps) {
    if (m.size() != n) throw InvalidArgument("database mixes chain lengths");
    for (auto [i, j] : m.pairs()) {
      sum[i * n + j] += 1.0;
      sum[j * n + i] += 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (double& v : sum) v *= inv;
  return AverageContactMap(n, std::move(sum));
}

AverageContactMap average_contact_map(std::span<const Conformation> db) {
  if (db.empty()) throw InvalidArgument("average contact map of an empty database");
  std::vector<ContactMap> maps;
  maps.reserve(db.size());
  for (const auto& c : db) maps.emplace_back(c);
  return average_contact_map(std::span<const ContactMap>(maps));
}

CompactEnsemble::CompactEnsemble(std::vector<Conformation> conformations)
    : conformations_(std::move(conformations)) {
  if (conformations_.empty()) throw InvalidArgument("ensemble must not be empty");
  side_ = conformations_.front().side();
  chain_length_ = conformations_.front().size();
  maps_.reserve(conformations_.size());
  for (const auto& c : conformations_) {
    if (c.size() != chain_length_) throw InvalidArgument("ensemble mixes chain lengths");
    maps_.emplace_back(c);
  }
  average_ = average_contact_map(std::span<const ContactMap>(maps_));
}

CompactEnsemble CompactEnsemble::enumerate(int side, const EnumerationOptions& opts) {
  return CompactEnsemble(enumerate_compact_conformations(side, opts));
}

std::ptrdiff_t CompactEnsemble::find(const Conformation& c) const {
  if (c.size() != chain_length_) return -1;
  const Conformation key = canonical_form(c, Symmetry::point);
  // Enumerated ensembles are sorted canonical forms; try the fast path first.
  auto it = std::lower_bound(conformations_.begin(), conformations_.end(), key);
  if (it != conformations_.end() && *it == key) return it - conformations_.begin();
  for (std::size_t k = 0; k < conformations_.size(); ++k) {
    if (canonical_form(conformations_[k], Symmetry::point) == key) {
      return static_cast<std::ptrdiff_t>(k);
    }
  }
  return -1;
}

std::vector<Conformation> read_conformations(std::istream& in) {
  std::vector<Conformation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::vector<Site> sites;
    std::string tok;
    while (tokens >> tok) {
      Site s;
      char comma = 0;
      std::istringstream pair(tok);
      if (!(pair >> s.x >> comma >> s.y) || comma != ',' || pair.peek() != EOF) {
        throw IoError("line " + std::to_string(lineno) + ": malformed site '" + tok + "'");
      }
      sites.push_back(s);
    }
    try {
      out.emplace_back(std::move(sites));
    } catch (const InvalidArgument& e) {
      throw IoError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Conformation> read_conformations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open conformation file: " + path);
  return read_conformations(in);
}

void write_conformations(std::ostream& out, std::span<const Conformation> confs) {
  for (const auto& c : confs) {
    bool first = true;
    for (const Site& s : c.sites()) {
      if (!first) out << ' ';
      out << s.x << ',' << s.y;
      first = false;
    }
    out << '\n';
  }
}

void write_conformations_file(const std::string& path, std::span<const Conformation> confs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write conformation file: " + path);
  write_conformations(out, confs);
}

}  // namespace latdesign
