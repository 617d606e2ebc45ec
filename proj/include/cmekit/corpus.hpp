#pragma once

#include "cmekit/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cmekit {

/// Named seeded generators of joint specs.
enum class CorpusId { independence, fullrank_random, deterministic_map, rank_deficient_kernel, pointmass };

std::optional<CorpusId> parse_corpus(const std::string &name);
std::string corpus_name(CorpusId id);
std::vector<std::string> corpus_names();

/// One member, fully determined by (id, seed).
JointSpec corpus_joint(CorpusId id, std::uint64_t seed);

/// Members with seeds seed, seed + 1, ...
std::vector<JointSpec> corpus(CorpusId id, std::uint64_t seed, std::size_t count);

} // namespace cmekit
