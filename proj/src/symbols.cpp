#include "ppm/symbols.hpp"

#include <charconv>

#include "ppm/errors.hpp"

namespace ppm {

SymbolSet::SymbolSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ConfigError("symbol set must not be empty");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& n = names_[i];
    if (n.empty() || n.find_first_of(" \t\n,/#") != std::string::npos) {
      throw ConfigError("invalid symbol name '" + n + "'");
    }
    if (!lookup_.emplace(n, static_cast<int>(i)).second) {
      throw ConfigError("duplicate symbol name '" + n + "'");
    }
  }
}

SymbolSet SymbolSet::generated(std::string prefix, std::size_t count) {
  if (count == 0) throw ConfigError("symbol set must not be empty");
  if (prefix.empty()) throw ConfigError("generated symbol prefix must not be empty");
  SymbolSet s;
  s.explicit_ = false;
  s.prefix_ = std::move(prefix);
  s.count_ = count;
  return s;
}

std::string SymbolSet::name(int index) const {
  if (!contains(index)) throw ConfigError("symbol index " + std::to_string(index) + " out of range");
  if (explicit_) return names_[static_cast<std::size_t>(index)];
  return prefix_ + std::to_string(index);
}

int SymbolSet::find(std::string_view name) const {
  if (explicit_) {
    auto it = lookup_.find(std::string(name));
    return it == lookup_.end() ? -1 : it->second;
  }
  if (name.size() <= prefix_.size() || name.substr(0, prefix_.size()) != prefix_) return -1;
  auto digits = name.substr(prefix_.size());
  if (digits.size() > 1 && digits.front() == '0') return -1;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return -1;
  if (value < 0 || static_cast<unsigned long long>(value) >= count_) return -1;
  return static_cast<int>(value);
}

int SymbolSet::index(std::string_view name) const {
  int i = find(name);
  if (i < 0) throw ConfigError("unknown symbol '" + std::string(name) + "'");
  return i;
}

bool SymbolSet::operator==(const SymbolSet& other) const {
  if (explicit_ != other.explicit_) return false;
  if (explicit_) return names_ == other.names_;
  return prefix_ == other.prefix_ && count_ == other.count_;
}

}  // namespace ppm
