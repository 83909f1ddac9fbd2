#include "dipcoal/partitions.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dipcoal {

namespace {

using nlohmann::json;

constexpr int kMaxPartitionN = 10;
constexpr int kMaxDiploidN = 8;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

void validate(const Partition& p) {
  if (p.n < 0) throw std::invalid_argument("Partition: n must be >= 0");
  std::vector<char> seen(static_cast<std::size_t>(p.n) + 1, 0);
  int covered = 0;
  int prev_front = 0;
  for (const auto& block : p.blocks) {
    if (block.empty()) throw std::invalid_argument("Partition: empty block");
    if (block.front() <= prev_front)
      throw std::invalid_argument("Partition: blocks must be ordered by least element");
    prev_front = block.front();
    int prev = 0;
    for (int gene : block) {
      if (gene < 1 || gene > p.n)
        throw std::invalid_argument("Partition: gene label out of range");
      if (gene <= prev)
        throw std::invalid_argument("Partition: block not sorted ascending");
      if (seen[gene]) throw std::invalid_argument("Partition: duplicate gene label");
      seen[gene] = 1;
      prev = gene;
      ++covered;
    }
  }
  if (covered != p.n)
    throw std::invalid_argument("Partition: blocks must cover {1..n}");
}

void validate(const DiploidState& s) {
  validate(s.partition);
  const int a = s.partition.n_blocks();
  std::vector<char> used(static_cast<std::size_t>(a), 0);
  int prev_first = -1;
  for (const auto& [i, j] : s.pairs) {
    if (i < 0 || j < 0 || i >= a || j >= a)
      throw std::invalid_argument("DiploidState: pair index out of range");
    if (i >= j) throw std::invalid_argument("DiploidState: pairs must have i < j");
    if (i <= prev_first)
      throw std::invalid_argument("DiploidState: pairs must be sorted by first index");
    prev_first = i;
    if (used[i] || used[j])
      throw std::invalid_argument("DiploidState: block in more than one pair");
    used[i] = used[j] = 1;
  }
}

void validate(const MergerSpec& m) {
  if (m.b < 2) throw std::invalid_argument("MergerSpec: b must be >= 2");
  if (m.singletons < 0)
    throw std::invalid_argument("MergerSpec: singletons must be >= 0");
  if (m.group_sizes.empty())
    throw std::invalid_argument("MergerSpec: at least one group required");
  int prev = 1 << 30;
  int total = 0;
  for (int k : m.group_sizes) {
    if (k < 2) throw std::invalid_argument("MergerSpec: group sizes must be >= 2");
    if (k > prev)
      throw std::invalid_argument("MergerSpec: group sizes must be sorted descending");
    prev = k;
    total += k;
  }
  if (total + m.singletons != m.b)
    throw std::invalid_argument("MergerSpec: group sizes plus singletons must equal b");
}

Partition singletons_partition(int n) {
  Partition p;
  p.n = n;
  p.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) p.blocks.push_back({i});
  return p;
}

std::vector<int> rgs(const Partition& p) {
  std::vector<int> code(static_cast<std::size_t>(p.n), 0);
  for (int b = 0; b < p.n_blocks(); ++b)
    for (int gene : p.blocks[static_cast<std::size_t>(b)])
      code[static_cast<std::size_t>(gene - 1)] = b;
  return code;
}

Partition partition_from_rgs(const std::vector<int>& code) {
  Partition p;
  p.n = static_cast<int>(code.size());
  int max_seen = -1;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const int b = code[i];
    if (b < 0 || b > max_seen + 1)
      throw std::invalid_argument("partition_from_rgs: not a restricted-growth string");
    if (b == max_seen + 1) {
      p.blocks.emplace_back();
      max_seen = b;
    }
    p.blocks[static_cast<std::size_t>(b)].push_back(static_cast<int>(i) + 1);
  }
  return p;
}

Partition canonical(Partition p) {
  for (auto& block : p.blocks) std::sort(block.begin(), block.end());
  std::sort(p.blocks.begin(), p.blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

Partition complete_dispersion(const DiploidState& s) { return s.partition; }

DiploidState dispersed_state(Partition p) { return DiploidState{std::move(p), {}}; }

std::vector<int> block_size_counts(const Partition& p) {
  std::vector<int> counts(static_cast<std::size_t>(p.n), 0);
  for (const auto& block : p.blocks)
    ++counts[block.size() - 1];
  return counts;
}

MergerRelation merger_spec(const Partition& from, const Partition& to) {
  if (from.n != to.n)
    throw std::invalid_argument("merger_spec: partitions over different label sets");
  std::vector<int> to_block_of(static_cast<std::size_t>(to.n) + 1, -1);
  for (int b = 0; b < to.n_blocks(); ++b)
    for (int gene : to.blocks[static_cast<std::size_t>(b)])
      to_block_of[static_cast<std::size_t>(gene)] = b;

  std::vector<int> constituents(static_cast<std::size_t>(to.n_blocks()), 0);
  for (const auto& block : from.blocks) {
    const int target = to_block_of[static_cast<std::size_t>(block.front())];
    for (int gene : block)
      if (to_block_of[static_cast<std::size_t>(gene)] != target)
        return Incompatible{};  // a block of `from` is split across `to`
    ++constituents[static_cast<std::size_t>(target)];
  }

  MergerSpec spec;
  spec.b = from.n_blocks();
  for (int c : constituents) {
    if (c == 1)
      ++spec.singletons;
    else
      spec.group_sizes.push_back(c);
  }
  if (spec.group_sizes.empty()) return NoMerge{};
  std::sort(spec.group_sizes.begin(), spec.group_sizes.end(), std::greater<int>());
  return spec;
}

std::vector<Partition> enumerate_partitions(int n) {
  if (n < 1 || n > kMaxPartitionN)
    throw std::invalid_argument("enumerate_partitions: n must lie in 1..10");
  std::vector<Partition> out;
  std::vector<int> code(static_cast<std::size_t>(n), 0);
  // odometer over restricted-growth strings in lexicographic order
  for (;;) {
    out.push_back(partition_from_rgs(code));
    int i = n - 1;
    for (; i > 0; --i) {
      int max_prefix = 0;
      for (int j = 0; j < i; ++j) max_prefix = std::max(max_prefix, code[static_cast<std::size_t>(j)]);
      if (code[static_cast<std::size_t>(i)] < max_prefix + 1) break;
    }
    if (i == 0) break;
    ++code[static_cast<std::size_t>(i)];
    std::fill(code.begin() + i + 1, code.end(), 0);
  }
  std::stable_sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    return a.n_blocks() > b.n_blocks();
  });
  return out;
}

namespace {

void enumerate_pairings(int a, int next, std::vector<char>& used,
                        std::vector<std::pair<int, int>>& current,
                        std::vector<std::vector<std::pair<int, int>>>& out) {
  while (next < a && used[static_cast<std::size_t>(next)]) ++next;
  if (next >= a) {
    out.push_back(current);
    return;
  }
  // leave `next` unpaired first, so the dispersed state leads its partition
  used[static_cast<std::size_t>(next)] = 1;
  enumerate_pairings(a, next + 1, used, current, out);
  for (int j = next + 1; j < a; ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    used[static_cast<std::size_t>(j)] = 1;
    current.emplace_back(next, j);
    enumerate_pairings(a, next + 1, used, current, out);
    current.pop_back();
    used[static_cast<std::size_t>(j)] = 0;
  }
  used[static_cast<std::size_t>(next)] = 0;
}

}  // namespace

std::vector<DiploidState> enumerate_diploid_states(int n) {
  if (n < 1 || n > kMaxDiploidN)
    throw std::invalid_argument("enumerate_diploid_states: n must lie in 1..8");
  std::vector<DiploidState> out;
  for (const auto& p : enumerate_partitions(n)) {
    const int a = p.n_blocks();
    std::vector<std::vector<std::pair<int, int>>> pairings;
    std::vector<char> used(static_cast<std::size_t>(a), 0);
    std::vector<std::pair<int, int>> current;
    enumerate_pairings(a, 0, used, current, pairings);
    for (auto& pairing : pairings) out.push_back(DiploidState{p, std::move(pairing)});
  }
  return out;
}

namespace {

void gen_specs(int b, int remaining, int max_part, std::vector<int>& groups,
               std::vector<MergerSpec>& out) {
  if (!groups.empty()) {
    MergerSpec m;
    m.b = b;
    m.group_sizes = groups;
    m.singletons = remaining;
    out.push_back(std::move(m));
  }
  for (int k = std::min(max_part, remaining); k >= 2; --k) {
    groups.push_back(k);
    gen_specs(b, remaining - k, k, groups, out);
    groups.pop_back();
  }
}

}  // namespace

std::vector<MergerSpec> enumerate_merger_specs(int b) {
  std::vector<MergerSpec> out;
  if (b < 2) return out;
  std::vector<int> groups;
  gen_specs(b, b, b, groups, out);
  std::sort(out.begin(), out.end());
  return out;
}

double merger_spec_multiplicity(const MergerSpec& m) {
  validate(m);
  double denom = factorial(m.singletons);
  int run = 1;
  for (std::size_t i = 0; i < m.group_sizes.size(); ++i) {
    denom *= factorial(m.group_sizes[i]);
    if (i + 1 < m.group_sizes.size() && m.group_sizes[i + 1] == m.group_sizes[i]) {
      ++run;
    } else {
      denom *= factorial(run);
      run = 1;
    }
  }
  return factorial(m.b) / denom;
}

std::string to_string(const Partition& p) {
  json j = json::array();
  for (const auto& block : p.blocks) j.push_back(block);
  return j.dump();
}

std::string to_string(const DiploidState& s) {
  if (s.pairs.empty()) return to_string(s.partition);
  json pairs = json::array();
  for (const auto& [i, j] : s.pairs) pairs.push_back({i + 1, j + 1});
  json obj;
  obj["blocks"] = json::parse(to_string(s.partition));
  obj["pairs"] = pairs;
  return obj.dump();
}

std::string to_string(const MergerSpec& m) {
  std::string s = "(" + std::to_string(m.b) + ";";
  for (std::size_t i = 0; i < m.group_sizes.size(); ++i) {
    if (i) s += "+";
    s += std::to_string(m.group_sizes[i]);
  }
  s += ";" + std::to_string(m.singletons) + ")";
  return s;
}

namespace {

Partition partition_from_json(const json& j) {
  Partition p;
  int max_gene = 0;
  for (const auto& arr : j) {
    std::vector<int> block;
    for (const auto& v : arr) {
      block.push_back(v.get<int>());
      max_gene = std::max(max_gene, block.back());
    }
    p.blocks.push_back(std::move(block));
  }
  p.n = max_gene;
  p = canonical(std::move(p));
  validate(p);
  return p;
}

}  // namespace

Partition partition_from_string(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_array())
    throw std::invalid_argument("partition_from_string: expected a nested list");
  return partition_from_json(j);
}

DiploidState diploid_state_from_string(const std::string& text) {
  json j = json::parse(text);
  DiploidState s;
  if (j.is_array()) {
    s.partition = partition_from_json(j);
  } else {
    s.partition = partition_from_json(j.at("blocks"));
    for (const auto& pr : j.at("pairs")) {
      const int a = pr.at(0).get<int>() - 1;
      const int b = pr.at(1).get<int>() - 1;
      s.pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(s.pairs.begin(), s.pairs.end());
  }
  validate(s);
  return s;
}

}  // namespace dipcoal
