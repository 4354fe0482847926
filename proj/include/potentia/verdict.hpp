#pragma once

#include <string>

namespace potentia {

enum class VerdictKind { Unavoidable, Avoidable, Inconclusive };

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::string rationale;
  bool closed_form = false;  // true when backed by an exact criterion
};

const char* to_string(VerdictKind kind);

}  // namespace potentia
