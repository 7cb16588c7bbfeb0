#pragma once

#include "ressm/gibbs/chain.hpp"
#include "ressm/model/chain_state.hpp"

#include <filesystem>
#include <string>

namespace ressm::io {

/// A ChainState as one tensor file per field under `dir`.
void write_state(const std::filesystem::path& dir, const model::ChainState& state);
model::ChainState read_state(const std::filesystem::path& dir);

/// Everything run_chain needs to continue, as tensor files plus
/// checkpoint.json. The directory is assembled beside `dir` and swapped in
/// by rename. `meta_json` is stored verbatim under "meta".
void write_checkpoint(const std::filesystem::path& dir,
                      const gibbs::ChainOutput& output,
                      const std::string& meta_json = "{}");

struct Checkpoint {
  gibbs::ChainOutput output;
  std::string meta_json;
};
/// Bitwise inverse of write_checkpoint.
Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace ressm::io
