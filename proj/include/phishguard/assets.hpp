#pragma once

#include <string_view>

// Data files compiled into the library from data/ at build time.
namespace phishguard::assets {

std::string_view stopwords_txt();
std::string_view lemma_index_tsv();
std::string_view lemma_exceptions_noun_tsv();
std::string_view lemma_exceptions_verb_tsv();

}  // namespace phishguard::assets
