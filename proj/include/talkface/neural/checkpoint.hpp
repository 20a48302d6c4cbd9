#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "talkface/neural/optim.hpp"
#include "talkface/neural/tensor.hpp"

namespace talkface::nn {

/// Text checkpoint, version 1:
///
///   talkface-checkpoint 1
///   meta <key> <value...>
///   param <name> <rank> <dims...>
///   <hexfloat values>
///   adam <steps>                      (optional)
///   adam.m <name> / <values>, adam.v <name> / <values>
///   sha256 <digest of every preceding byte>
///
/// Values are exact hexadecimal floats, so save/load is bit-exact.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    ParameterSet params;
    std::optional<std::uint64_t> adam_steps;
    std::vector<std::vector<double>> adam_m;
    std::vector<std::vector<double>> adam_v;
    std::string digest;
};

/// Returns the content digest written into the file.
std::string save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                            const std::map<std::string, std::string>& meta, const Adam* adam = nullptr);

/// Verifies the digest (data error "checksum mismatch" on failure) and parses.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies tensors into a model with the same names and shapes, in order.
void restore_params(ParameterSet& into, const Checkpoint& ckpt);
void restore_optimizer(Adam& into, const Checkpoint& ckpt);

}  // namespace talkface::nn
