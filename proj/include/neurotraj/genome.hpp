#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotraj/random.hpp"

namespace neurotraj {

inline constexpr std::size_t kLocusCount = 13;

struct Locus {
  std::string gene;
  std::vector<std::string> alleles;

  friend bool operator==(const Locus&, const Locus&) = default;
};

/// The evolvable hyperparameter search space: 13 genes with their symbolic allele sets.
/// Genomes index into this table; nothing else decodes them.
class AlleleTable {
 public:
  explicit AlleleTable(std::vector<Locus> loci);

  /// The CNN-LSTM hyperparameter table (batch size through flattened dropout).
  static const AlleleTable& standard();

  std::size_t size() const noexcept { return loci_.size(); }
  const Locus& locus(std::size_t i) const { return loci_.at(i); }
  std::size_t allele_count(std::size_t i) const { return loci_.at(i).alleles.size(); }
  const std::string& value(std::size_t locus, std::size_t allele) const {
    return loci_.at(locus).alleles.at(allele);
  }

  /// Ordered object: gene name -> list of values (numbers where the allele is numeric).
  nlohmann::ordered_json to_json() const;
  static AlleleTable from_json(const nlohmann::ordered_json& doc);

  friend bool operator==(const AlleleTable&, const AlleleTable&) = default;

 private:
  std::vector<Locus> loci_;
};

struct Genome {
  std::array<std::uint8_t, kLocusCount> indices{};

  std::uint8_t operator[](std::size_t i) const { return indices[i]; }
  std::uint8_t& operator[](std::size_t i) { return indices[i]; }

  std::uint64_t hash() const noexcept;

  friend bool operator==(const Genome&, const Genome&) = default;
  friend auto operator<=>(const Genome&, const Genome&) = default;
};

bool is_valid(const Genome& g, const AlleleTable& table = AlleleTable::standard());

std::size_t hamming_distance(const Genome& a, const Genome& b);

std::string to_string(const Genome& g);

Genome random_genome(Rng& rng, const AlleleTable& table = AlleleTable::standard());

/// Children for a fixed cut point `cut` in [1, 12]: child1 = a[0..cut) + b[cut..).
std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t cut);

/// One-point crossover with the cut drawn uniformly from 1..12.
std::pair<Genome, Genome> single_point_crossover(const Genome& a, const Genome& b, Rng& rng);

/// With probability `rate`, reassign one uniformly chosen locus to a different allele.
Genome mutate(const Genome& g, double rate, Rng& rng, const AlleleTable& table = AlleleTable::standard());

struct VariationOperators {
  double crossover_rate = 1.0;
  double mutation_rate = 0.5;

  /// Crossover (when it fires) followed by mutation of both children.
  std::pair<Genome, Genome> breed(const Genome& a, const Genome& b, Rng& rng) const;
};

}  // namespace neurotraj
