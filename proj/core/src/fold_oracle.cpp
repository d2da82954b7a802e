#include "latdesign/fold_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "latdesign/errors.hpp"
#include "latdesign/parallel.hpp"

namespace latdesign {

double FoldResult::energy_of(std::size_t structure) const {
  for (const auto& entry : spectrum) {
    if (entry.index == structure) return entry.energy;
  }
  throw InvalidArgument("structure not in fold spectrum");
}

FoldingEngine::FoldingEngine(std::span<const ContactMap> ensemble, EnergyMatrix e_truth)
    : e_(std::move(e_truth)) {
  if (ensemble.empty()) throw InvalidArgument("folding over an empty ensemble");
  n_ = ensemble.front().size();
  for (const auto& c : ensemble) {
    if (c.size() != n_) throw InvalidArgument("ensemble mixes chain lengths");
    pairs_.insert(pairs_.end(), c.pairs().begin(), c.pairs().end());
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  offsets_.reserve(ensemble.size() + 1);
  offsets_.push_back(0);
  for (const auto& c : ensemble) {
    for (const auto& p : c.pairs()) {
      const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
      pair_index_.push_back(static_cast<std::uint32_t>(it - pairs_.begin()));
    }
    offsets_.push_back(pair_index_.size());
  }
}

void FoldingEngine::energies(std::span<const std::uint8_t> types, std::vector<double>& out,
                             std::vector<double>& scratch) const {
  scratch.resize(pairs_.size());
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    scratch[p] = e_(types[pairs_[p].first], types[pairs_[p].second]);
  }
  const std::size_t m = size();
  out.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double total = 0.0;
    for (std::size_t q = offsets_[k]; q < offsets_[k + 1]; ++q) total += scratch[pair_index_[q]];
    out[k] = total;
  }
}

FoldResult FoldingEngine::fold(const Sequence& s, double beta, double p_fold) const {
  if (s.size() != n_) throw InvalidArgument("sequence length does not match the ensemble");
  for (auto t : s.types()) {
    if (t >= e_.alphabet_size()) throw InvalidArgument("residue type outside the energy matrix alphabet");
  }
  std::vector<double> energies;
  std::vector<double> scratch;
  this->energies(s.types(), energies, scratch);

  FoldResult fr;
  fr.spectrum.reserve(energies.size());
  for (std::size_t k = 0; k < energies.size(); ++k) fr.spectrum.push_back({k, energies[k]});
  std::sort(fr.spectrum.begin(), fr.spectrum.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return a.energy < b.energy || (a.energy == b.energy && a.index < b.index);
  });
  const double e_min = fr.spectrum.front().energy;
  for (const auto& entry : fr.spectrum) {
    if (entry.energy > e_min + kDegeneracyTolerance) break;
    fr.ground_states.push_back(entry.index);
  }
  std::sort(fr.ground_states.begin(), fr.ground_states.end());
  fr.p_native = boltzmann_probability(energies, fr.spectrum.front().index, beta);
  fr.foldable = fr.ground_states.size() == 1 && fr.p_native >= p_fold;
  return fr;
}

FoldResult fold(const Sequence& s, std::span<const ContactMap> ensemble, const EnergyMatrix& e_truth,
                double beta, double p_fold) {
  return FoldingEngine(ensemble, e_truth).fold(s, beta, p_fold);
}

FoldResult fold(const Sequence& s, const CompactEnsemble& ensemble, const EnergyMatrix& e_truth,
                double beta, double p_fold) {
  return FoldingEngine(ensemble, e_truth).fold(s, beta, p_fold);
}

std::vector<std::size_t> competitors(const FoldResult& fr, std::size_t target, std::size_t n_max) {
  const double e_target = fr.energy_of(target);
  std::vector<std::size_t> out;
  for (const auto& entry : fr.spectrum) {
    if (out.size() >= n_max) break;
    if (entry.energy > e_target + kDegeneracyTolerance) break;
    if (entry.index != target) out.push_back(entry.index);
  }
  return out;
}

std::size_t CensusResult::most_designable() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].designing > records[best].designing) best = k;
  }
  return best;
}

std::uint64_t checked_sequence_count(const Composition& comp, std::uint64_t cap) {
  const auto count = multinomial_count(comp);
  if (!count || *count > cap) {
    throw ResourceLimitError("composition " + comp.to_string() + " has " +
                                 (count ? std::to_string(*count) : std::string(">2^64")) +
                                 " sequences, above the cap of " + std::to_string(cap),
                             count.value_or(UINT64_MAX));
  }
  return *count;
}

CensusResult designability_census(const CompactEnsemble& ensemble, const Composition& comp,
                                  const EnergyMatrix& e_truth, double beta, double p_fold,
                                  const CensusOptions& opts) {
  if (static_cast<std::size_t>(comp.total()) != ensemble.chain_length()) {
    throw InvalidArgument("composition total does not match the chain length");
  }
  if (comp.alphabet_size() != e_truth.alphabet_size()) {
    throw InvalidArgument("composition and energy matrix disagree on the alphabet size");
  }
  const std::uint64_t total = checked_sequence_count(comp, opts.max_sequences);
  const FoldingEngine engine(ensemble, e_truth);
  const std::size_t m = ensemble.size();

  struct Partial {
    std::vector<std::uint64_t> unique;
    std::vector<std::uint64_t> designing;
    std::vector<std::vector<Sequence>> sequences;
  };
  const unsigned threads = opts.threads ? opts.threads : default_thread_count();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::uint64_t>(total, 4ull * threads));
  std::vector<Partial> partials(chunks);

  parallel_chunks(static_cast<std::size_t>(total), chunks, threads,
                  [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    Partial& part = partials[chunk];
    part.unique.assign(m, 0);
    part.designing.assign(m, 0);
    if (opts.keep_sequences) part.sequences.resize(m);
    Sequence seq = nth_sequence(comp, begin);
    auto& types = seq.mutable_types();
    std::vector<double> energies;
    std::vector<double> scratch;
    for (std::size_t r = begin; r < end; ++r) {
      engine.energies(types, energies, scratch);
      std::size_t best = 0;
      for (std::size_t k = 1; k < m; ++k) {
        if (energies[k] < energies[best]) best = k;
      }
      const double e_min = energies[best];
      bool unique = true;
      double z = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (k != best && energies[k] <= e_min + kDegeneracyTolerance) {
          unique = false;
          break;
        }
        z += std::exp(-beta * (energies[k] - e_min));
      }
      if (unique) {
        ++part.unique[best];
        if (1.0 / z >= p_fold) {
          ++part.designing[best];
          if (opts.keep_sequences) part.sequences[best].push_back(seq);
        }
      }
      std::next_permutation(types.begin(), types.end());
    }
  });

  CensusResult result;
  result.total_sequences = total;
  result.records.resize(m);
  result.designing.resize(m);
  for (std::size_t k = 0; k < m; ++k) result.records[k].structure = k;
  for (auto& part : partials) {
    if (part.unique.empty()) continue;
    for (std::size_t k = 0; k < m; ++k) {
      result.records[k].unique_ground_state += part.unique[k];
      result.records[k].designing += part.designing[k];
      if (opts.keep_sequences) {
        auto& dst = result.designing[k];
        dst.insert(dst.end(), std::make_move_iterator(part.sequences[k].begin()),
                   std::make_move_iterator(part.sequences[k].end()));
      }
    }
  }
  return result;
}

}  // namespace latdesign
