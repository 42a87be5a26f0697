#pragma once

#include "scriptdet/script_class.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace scriptdet {

struct EmbeddingVector {
  std::vector<double> values;

  [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
  [[nodiscard]] double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Per-script semantic anchors; every entry has dimension `dim`.
struct ClassEmbeddingTable {
  std::map<ScriptClass, EmbeddingVector> entries;
  std::size_t dim = 0;

  [[nodiscard]] bool contains(const ScriptClass& c) const { return entries.contains(c); }
  /// Throws MissingClass.
  [[nodiscard]] const EmbeddingVector& at(const ScriptClass& c) const;
};

}  // namespace scriptdet
