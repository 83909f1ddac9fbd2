#pragma once

#include <compare>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dipcoal {

// Partition of the gene labels {1..n}. Blocks are sorted ascending and listed
// by least element; every function below expects and preserves that form.
struct Partition {
  int n = 0;
  std::vector<std::vector<int>> blocks;

  bool operator==(const Partition&) const = default;
  int n_blocks() const { return static_cast<int>(blocks.size()); }
};

// Partition plus a pairing of some blocks: a pair (i, j) of 0-based block
// indices marks the two chromosomes of one diploid individual. A block index
// appears in at most one pair; pairs are stored with i < j, sorted by i.
// Zero pairs means the state is completely dispersed.
struct DiploidState {
  Partition partition;
  std::vector<std::pair<int, int>> pairs;

  bool operator==(const DiploidState&) const = default;
};

// Merger class (b; k_1..k_j; s): of b blocks, j groups of sizes k_i >= 2
// merge (sizes sorted descending) and s blocks stay untouched.
struct MergerSpec {
  int b = 0;
  std::vector<int> group_sizes;
  int singletons = 0;

  auto operator<=>(const MergerSpec&) const = default;
  int total_merged() const {
    int t = 0;
    for (int k : group_sizes) t += k;
    return t;
  }
  int n_groups() const { return static_cast<int>(group_sizes.size()); }
};

struct NoMerge {
  bool operator==(const NoMerge&) const = default;
};
struct Incompatible {
  bool operator==(const Incompatible&) const = default;
};
using MergerRelation = std::variant<MergerSpec, NoMerge, Incompatible>;

void validate(const Partition& p);     // throws std::invalid_argument
void validate(const DiploidState& s);  // also checks pair indices
void validate(const MergerSpec& m);

Partition singletons_partition(int n);

// Restricted-growth encoding: rgs[i] = canonical block index of gene i+1.
std::vector<int> rgs(const Partition& p);
Partition partition_from_rgs(const std::vector<int>& code);

// Sorts genes within blocks and blocks by least element.
Partition canonical(Partition p);

// Forgets the pairing.
Partition complete_dispersion(const DiploidState& s);
DiploidState dispersed_state(Partition p);

// Counts blocks of each size; index i holds the number of blocks of size i+1.
std::vector<int> block_size_counts(const Partition& p);

// Classifies `to` against `from`: NoMerge when equal, Incompatible unless
// every block of `to` is a union of blocks of `from`, otherwise the spec.
MergerRelation merger_spec(const Partition& from, const Partition& to);

// All partitions of {1..n}, n <= 10; ordered by block count descending, then
// by restricted-growth string. First entry is all singletons, last all merged.
std::vector<Partition> enumerate_partitions(int n);

// All pairing states over all partitions of {1..n}, n <= 8. States sharing a
// partition are contiguous with the dispersed (zero-pair) state first.
std::vector<DiploidState> enumerate_diploid_states(int n);

// All merger classes with the given b, ordered; empty for b < 2.
std::vector<MergerSpec> enumerate_merger_specs(int b);

// Number of set partitions of b labeled blocks realizing the spec
// (multinomial coefficient divided by symmetry of equal group sizes).
double merger_spec_multiplicity(const MergerSpec& m);

// Text forms. Partitions serialize as nested 1-based lists "[[1,2],[3]]";
// states append the pair list with 1-based block indices; specs print as
// "(b;k1+k2;s)".
std::string to_string(const Partition& p);
std::string to_string(const DiploidState& s);
std::string to_string(const MergerSpec& m);
Partition partition_from_string(const std::string& text);
DiploidState diploid_state_from_string(const std::string& text);

}  // namespace dipcoal
