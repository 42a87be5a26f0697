#include "scriptdet/embedding.hpp"
#include "scriptdet/error.hpp"
#include "scriptdet/script_class.hpp"

#include "scriptdet/detail/strings.hpp"

#include <cmath>

namespace scriptdet {

ScriptClass::ScriptClass(std::string_view raw) : name_(detail::to_lower_ascii(detail::trim(raw))) {
  if (name_.empty()) throw Error(ErrorCode::MalformedLine, "empty script name");
}

ScriptSet make_script_set(std::initializer_list<std::string_view> names) {
  ScriptSet out;
  for (auto n : names) out.emplace(n);
  return out;
}

ScriptSet ClassSplit::all() const {
  ScriptSet out = seen;
  out.insert(unseen.begin(), unseen.end());
  return out;
}

void ClassSplit::validate() const {
  if (seen.empty() || unseen.empty()) {
    throw Error(ErrorCode::InvalidConfig, "class split needs at least one seen and one unseen script");
  }
  for (const auto& c : unseen) {
    if (seen.contains(c)) throw Error(ErrorCode::InvalidConfig, "script '" + c.name() + "' is both seen and unseen");
  }
}

ClassSplit ClassSplit::mlt2019() {
  return ClassSplit{make_script_set({"latin", "bangla", "arabic", "japanese"}),
                    make_script_set({"chinese", "korean", "hindi"})};
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

const EmbeddingVector& ClassEmbeddingTable::at(const ScriptClass& c) const {
  const auto it = entries.find(c);
  if (it == entries.end()) throw Error(ErrorCode::MissingClass, "no class embedding for '" + c.name() + "'");
  return it->second;
}

}  // namespace scriptdet
