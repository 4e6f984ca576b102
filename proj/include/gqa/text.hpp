#pragma once

#include <string>
#include <vector>

namespace gqa {

// Shared tokenization for questions and KB labels: lowercase, split on
// whitespace and punctuation, punctuation dropped. Never yields empty tokens.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace gqa
