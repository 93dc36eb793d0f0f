#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ppm {

// Bijection between dense indices [0, size) and symbol names.
//
// Two storage forms: an explicit name list, or a generated family where
// index i is named prefix + decimal(i). The generated form serves the
// very large observation spaces (the gallery has millions of raw frames).
class SymbolSet {
 public:
  SymbolSet() = default;
  explicit SymbolSet(std::vector<std::string> names);
  static SymbolSet generated(std::string prefix, std::size_t count);

  std::size_t size() const { return explicit_ ? names_.size() : count_; }
  bool empty() const { return size() == 0; }
  bool contains(int index) const { return index >= 0 && static_cast<std::size_t>(index) < size(); }

  std::string name(int index) const;
  // Returns -1 if the name is not in the set.
  int find(std::string_view name) const;
  // Throws ConfigError if the name is not in the set.
  int index(std::string_view name) const;

  bool operator==(const SymbolSet& other) const;

 private:
  bool explicit_ = true;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> lookup_;
  std::string prefix_;
  std::size_t count_ = 0;
};

struct Alphabet {
  SymbolSet actions;
  SymbolSet observations;

  bool operator==(const Alphabet&) const = default;
};

}  // namespace ppm
