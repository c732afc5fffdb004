#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mick {

/// Token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool overlaps(const TokenSpan& other) const noexcept {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// One labelled sentence: tokens, head and tail entity spans, relation.
struct Instance {
  std::vector<std::string> tokens;
  TokenSpan head;
  TokenSpan tail;
  std::string relation;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Throws ValidationError when spans are out of range, empty or overlapping,
// or the relation label is empty.
void validate(const Instance& inst);

enum class Origin { kOriginal, kCrossDomain };

/// Instances grouped by relation label. Groups are kept in label order.
struct Dataset {
  std::map<std::string, std::vector<Instance>> groups;
  Origin origin = Origin::kOriginal;

  std::size_t class_count() const noexcept { return groups.size(); }
  std::size_t instance_count() const noexcept;
  std::set<std::string> labels() const;

  // Validates and files the instance under its relation.
  void add(Instance inst);
};

// One record per line:
//   {"tokens": [...], "head": [s, e], "tail": [s, e], "relation": "..."}
// Unknown keys are ignored. Blank lines are skipped.
Instance parse_instance(std::string_view line, std::size_t line_number);
std::string format_instance(const Instance& inst);

Dataset read_dataset(std::istream& in, Origin origin);
Dataset load_dataset(const std::filesystem::path& path, Origin origin);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

/// Relation labels present in both sets. Empty means the split is usable.
std::set<std::string> verify_disjoint(const Dataset& train, const Dataset& test);

// Throws ValidationError listing every shared label.
void require_disjoint(const Dataset& train, const Dataset& test);

struct DatasetStats {
  std::string name;
  std::size_t classes = 0;
  std::size_t min_per_class = 0;
  std::size_t max_per_class = 0;
  std::size_t instances = 0;
};

DatasetStats dataset_stats(const Dataset& data, std::string name);

// Dataset | #cls. | #inst./cls. | #inst. table. Non-uniform classes print
// their per-class range.
std::string format_stats_table(const std::vector<DatasetStats>& rows);

}  // namespace mick
