#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>

namespace scriptdet {

/// A script (writing system) label. Names are stored trimmed and lower-cased
/// so "Latin", " latin " and "LATIN" are the same class.
class ScriptClass {
 public:
  /// Throws MalformedLine when the trimmed name is empty.
  explicit ScriptClass(std::string_view raw);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  friend auto operator<=>(const ScriptClass&, const ScriptClass&) = default;

 private:
  std::string name_;
};

using ScriptSet = std::set<ScriptClass>;

ScriptSet make_script_set(std::initializer_list<std::string_view> names);

/// Seen scripts are available at training time, unseen ones only at test time.
struct ClassSplit {
  ScriptSet seen;
  ScriptSet unseen;

  [[nodiscard]] std::size_t n() const { return seen.size() + unseen.size(); }
  [[nodiscard]] ScriptSet all() const;

  /// Throws InvalidConfig if the two sets overlap or either is empty.
  void validate() const;

  /// Seen {latin, bangla, arabic, japanese}, unseen {chinese, korean, hindi}.
  static ClassSplit mlt2019();
};

}  // namespace scriptdet
