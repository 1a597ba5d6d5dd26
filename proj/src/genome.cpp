#include "neurotraj/genome.hpp"

#include <charconv>
#include <sstream>

#include "neurotraj/errors.hpp"

namespace neurotraj {

namespace {

std::vector<Locus> standard_loci() {
  return {
      {"Batch Size", {"50", "75", "100", "125"}},
      {"Epochs", {"10", "20", "30", "40", "50"}},
      {"Momentum", {"0.8", "0.85", "0.9", "0.95"}},
      {"Loss Function", {"MSE", "Log Cosh"}},
      {"Optimiser", {"RMSprop", "NAdam", "SGD", "AdaGrad", "Adadelta", "Adam", "AdaMax"}},
      {"LSTM Cells", {"1", "2", "3", "4"}},
      {"LSTM Dropout", {"0.2", "0.25", "0.3", "0.35", "0.4", "0.5"}},
      {"Hidden Units", {"100", "125", "150", "175", "200", "225", "250"}},
      {"CNN Flattened 1", {"256", "512", "768", "1024"}},
      {"CNN Flattened 2", {"256", "512", "768", "1024"}},
      {"LSTM Flattened 1", {"64", "128", "256", "512"}},
      {"LSTM Flattened 2", {"64", "128", "256", "512"}},
      {"Flattened Dropout", {"0.05", "0.1", "0.15", "0.2", "0.25"}},
  };
}

nlohmann::ordered_json allele_to_json(const std::string& label) {
  long long as_int = 0;
  const char* first = label.data();
  const char* last = label.data() + label.size();
  if (auto [ptr, ec] = std::from_chars(first, last, as_int); ec == std::errc{} && ptr == last) {
    return as_int;
  }
  double as_double = 0.0;
  if (auto [ptr, ec] = std::from_chars(first, last, as_double); ec == std::errc{} && ptr == last) {
    // Keep the label as the canonical textual form; the number is only for readers.
    return nlohmann::ordered_json::parse(label);
  }
  return label;
}

std::string allele_from_json(const nlohmann::ordered_json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return value.dump();
  throw ConfigError("allele values must be strings or numbers");
}

}  // namespace

AlleleTable::AlleleTable(std::vector<Locus> loci) : loci_(std::move(loci)) {
  if (loci_.size() != kLocusCount) {
    throw ConfigError("allele table must have exactly 13 loci, got " + std::to_string(loci_.size()));
  }
  for (const auto& locus : loci_) {
    if (locus.alleles.size() < 2 || locus.alleles.size() > 255) {
      throw ConfigError("locus '" + locus.gene + "' needs between 2 and 255 alleles");
    }
  }
}

const AlleleTable& AlleleTable::standard() {
  static const AlleleTable table(standard_loci());
  return table;
}

nlohmann::ordered_json AlleleTable::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& locus : loci_) {
    auto values = nlohmann::ordered_json::array();
    for (const auto& a : locus.alleles) values.push_back(allele_to_json(a));
    doc[locus.gene] = std::move(values);
  }
  return doc;
}

AlleleTable AlleleTable::from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("allele table document must be a JSON object");
  std::vector<Locus> loci;
  for (const auto& [gene, values] : doc.items()) {
    if (!values.is_array()) throw ConfigError("alleles for '" + gene + "' must be an array");
    Locus locus{gene, {}};
    for (const auto& v : values) locus.alleles.push_back(allele_from_json(v));
    loci.push_back(std::move(locus));
  }
  return AlleleTable(std::move(loci));
}

std::uint64_t Genome::hash() const noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto idx : indices) h = hash_combine(h, idx);
  return h;
}

bool is_valid(const Genome& g, const AlleleTable& table) {
  for (std::size_t i = 0; i < kLocusCount; ++i) {
    if (g[i] >= table.allele_count(i)) return false;
  }
  return true;
}

std::size_t hamming_distance(const Genome& a, const Genome& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < kLocusCount; ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

std::string to_string(const Genome& g) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < kLocusCount; ++i) {
    if (i) os << ',';
    os << static_cast<int>(g[i]);
  }
  os << ']';
  return os.str();
}

Genome random_genome(Rng& rng, const AlleleTable& table) {
  Genome g;
  for (std::size_t i = 0; i < kLocusCount; ++i) {
    g[i] = static_cast<std::uint8_t>(uniform_index(rng, table.allele_count(i)));
  }
  return g;
}

std::pair<Genome, Genome> crossover_at(const Genome& a, const Genome& b, std::size_t cut) {
  if (cut < 1 || cut >= kLocusCount) throw ContractError("crossover cut must lie in [1, 12]");
  Genome c1 = a;
  Genome c2 = b;
  for (std::size_t i = cut; i < kLocusCount; ++i) {
    c1[i] = b[i];
    c2[i] = a[i];
  }
  return {c1, c2};
}

std::pair<Genome, Genome> single_point_crossover(const Genome& a, const Genome& b, Rng& rng) {
  const std::size_t cut = 1 + uniform_index(rng, kLocusCount - 1);
  return crossover_at(a, b, cut);
}

Genome mutate(const Genome& g, double rate, Rng& rng, const AlleleTable& table) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ContractError("mutation rate must lie in [0, 1]");
  if (!bernoulli(rng, rate)) return g;
  Genome out = g;
  const std::size_t locus = uniform_index(rng, kLocusCount);
  // Draw from the other (count - 1) alleles, skipping the current one.
  const std::size_t count = table.allele_count(locus);
  std::size_t pick = uniform_index(rng, count - 1);
  if (pick >= g[locus]) ++pick;
  out[locus] = static_cast<std::uint8_t>(pick);
  return out;
}

std::pair<Genome, Genome> VariationOperators::breed(const Genome& a, const Genome& b, Rng& rng) const {
  auto children = bernoulli(rng, crossover_rate) ? single_point_crossover(a, b, rng) : std::pair{a, b};
  children.first = mutate(children.first, mutation_rate, rng);
  children.second = mutate(children.second, mutation_rate, rng);
  return children;
}

}  // namespace neurotraj
