#pragma once

#include <string_view>
#include <utility>

// Bundled English resources for the bootstrap tagger: a fixed stopword list
// (copulas excluded, see lingo.hpp) and a small word->tag lexicon. Both are
// versioned with the repo so tagging is identical across runs and platforms.

namespace kgtext::lingo_data {

inline constexpr int kVersion = 1;

inline constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",    "after",   "again",   "against",
    "all",     "an",      "and",      "any",     "as",      "at",
    "because", "before",  "below",    "between", "both",    "but",
    "by",      "can",     "cannot",   "could",   "did",     "do",
    "does",    "doing",   "down",     "during",  "each",    "few",
    "for",     "from",    "further",  "had",     "has",     "have",
    "having",  "he",      "her",      "here",    "hers",    "herself",
    "him",     "himself", "his",      "how",     "i",       "if",
    "in",      "into",    "it",       "its",     "itself",  "just",
    "me",      "more",    "most",     "my",      "myself",  "no",
    "nor",     "not",     "now",      "of",      "off",     "on",
    "once",    "only",    "or",       "other",   "our",     "ours",
    "ourselves", "out",   "over",     "own",     "same",    "she",
    "should",  "so",      "some",     "such",    "than",    "that",
    "the",     "their",   "theirs",   "them",    "themselves", "then",
    "there",   "these",   "they",     "this",    "those",   "through",
    "to",      "too",     "under",    "until",   "up",      "very",
    "we",      "what",    "when",     "where",   "which",   "while",
    "who",     "whom",    "why",      "will",    "with",    "would",
    "you",     "your",    "yours",    "yourself", "yourselves",
    ",", ".", ";", ":", "!", "?", "(", ")", "'", "\"",
};

// tag letters: N = NOUN, V = VERB, A = ADJ
inline constexpr std::pair<std::string_view, char> kLexicon[] = {
    // common scene nouns
    {"baby", 'N'},    {"ball", 'N'},     {"balloon", 'N'}, {"bat", 'N'},
    {"beach", 'N'},   {"bench", 'N'},    {"bike", 'N'},    {"bird", 'N'},
    {"blanket", 'N'}, {"boat", 'N'},     {"book", 'N'},    {"bottle", 'N'},
    {"bowl", 'N'},    {"box", 'N'},      {"boy", 'N'},     {"building", 'N'},
    {"bus", 'N'},     {"cap", 'N'},      {"car", 'N'},     {"cat", 'N'},
    {"chair", 'N'},   {"child", 'N'},    {"city", 'N'},    {"cloud", 'N'},
    {"coat", 'N'},    {"couch", 'N'},    {"cow", 'N'},     {"cup", 'N'},
    {"dog", 'N'},     {"door", 'N'},     {"dress", 'N'},   {"elephant", 'N'},
    {"face", 'N'},    {"fence", 'N'},    {"field", 'N'},   {"fire", 'N'},
    {"flag", 'N'},    {"floor", 'N'},    {"flower", 'N'},  {"food", 'N'},
    {"fork", 'N'},    {"girl", 'N'},     {"glass", 'N'},   {"grass", 'N'},
    {"ground", 'N'},  {"hair", 'N'},     {"hand", 'N'},    {"hat", 'N'},
    {"head", 'N'},    {"helmet", 'N'},   {"hill", 'N'},    {"horse", 'N'},
    {"house", 'N'},   {"hydrant", 'N'},  {"jacket", 'N'},  {"kite", 'N'},
    {"knife", 'N'},   {"lady", 'N'},     {"lamp", 'N'},    {"leaf", 'N'},
    {"light", 'N'},   {"man", 'N'},      {"men", 'N'},     {"mirror", 'N'},
    {"motorcycle", 'N'}, {"mountain", 'N'}, {"mouth", 'N'}, {"ocean", 'N'},
    {"pants", 'N'},   {"paper", 'N'},    {"park", 'N'},    {"person", 'N'},
    {"phone", 'N'},   {"picture", 'N'},  {"pizza", 'N'},   {"plane", 'N'},
    {"plant", 'N'},   {"plate", 'N'},    {"player", 'N'},  {"pole", 'N'},
    {"road", 'N'},    {"rock", 'N'},     {"roof", 'N'},    {"room", 'N'},
    {"sand", 'N'},    {"shadow", 'N'},   {"sheep", 'N'},   {"shelf", 'N'},
    {"shirt", 'N'},   {"shoe", 'N'},     {"shorts", 'N'},  {"sidewalk", 'N'},
    {"sign", 'N'},    {"sink", 'N'},     {"sky", 'N'},     {"snow", 'N'},
    {"sofa", 'N'},    {"street", 'N'},   {"surfboard", 'N'}, {"table", 'N'},
    {"tail", 'N'},    {"tennis", 'N'},   {"tower", 'N'},   {"train", 'N'},
    {"tree", 'N'},    {"truck", 'N'},    {"umbrella", 'N'}, {"wall", 'N'},
    {"watch", 'N'},   {"water", 'N'},    {"window", 'N'},  {"woman", 'N'},
    {"women", 'N'},   {"zebra", 'N'},
    // common verbs (base forms; -ing/-ed forms come from the suffix rules)
    {"carries", 'V'}, {"carry", 'V'},    {"catch", 'V'},   {"eat", 'V'},
    {"eats", 'V'},    {"hit", 'V'},      {"hits", 'V'},    {"hold", 'V'},
    {"holds", 'V'},   {"jump", 'V'},     {"jumps", 'V'},   {"kick", 'V'},
    {"kicks", 'V'},   {"lie", 'V'},      {"lies", 'V'},    {"look", 'V'},
    {"looks", 'V'},   {"play", 'V'},     {"plays", 'V'},   {"pull", 'V'},
    {"pulls", 'V'},   {"push", 'V'},     {"pushes", 'V'},  {"ride", 'V'},
    {"rides", 'V'},   {"run", 'V'},      {"runs", 'V'},    {"sit", 'V'},
    {"sits", 'V'},    {"stand", 'V'},    {"stands", 'V'},  {"throw", 'V'},
    {"throws", 'V'},  {"touch", 'V'},    {"touches", 'V'}, {"wear", 'V'},
    {"wears", 'V'},
    // common adjectives
    {"big", 'A'},     {"black", 'A'},    {"blue", 'A'},    {"bright", 'A'},
    {"brown", 'A'},   {"clean", 'A'},    {"clear", 'A'},   {"cold", 'A'},
    {"dark", 'A'},    {"dry", 'A'},      {"golden", 'A'},  {"gray", 'A'},
    {"green", 'A'},   {"large", 'A'},    {"little", 'A'},  {"long", 'A'},
    {"metal", 'A'},   {"new", 'A'},      {"old", 'A'},     {"open", 'A'},
    {"orange", 'A'},  {"pink", 'A'},     {"purple", 'A'},  {"red", 'A'},
    {"round", 'A'},   {"short", 'A'},    {"silver", 'A'},  {"small", 'A'},
    {"tall", 'A'},    {"warm", 'A'},     {"wet", 'A'},     {"white", 'A'},
    {"wooden", 'A'},  {"yellow", 'A'},   {"young", 'A'},
};

// checked in order; first match wins
inline constexpr std::pair<std::string_view, char> kSuffixRules[] = {
    {"ing", 'V'}, {"ed", 'V'}, {"ful", 'A'}, {"ous", 'A'},
    {"y", 'A'},   {"s", 'N'},
};

}  // namespace kgtext::lingo_data
