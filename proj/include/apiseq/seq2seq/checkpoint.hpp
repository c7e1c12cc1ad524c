#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "apiseq/seq2seq/model.hpp"

namespace apiseq::seq2seq {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: "APISEQ1", uint32 version, uint64 header length, JSON header
/// (config, fingerprints, epoch, tensor names/shapes/flags), the tensors as
/// little-endian float64 in header order, then a CRC32 of everything before it.
std::string serialize_checkpoint(const Seq2SeqModel& model);
Seq2SeqModel deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Seq2SeqModel& model, const std::filesystem::path& path);

/// Throws IoError, FormatError (bad magic), VersionMismatch, CorruptFile.
Seq2SeqModel load_checkpoint(const std::filesystem::path& path);

}  // namespace apiseq::seq2seq
