#pragma once

// Binary checkpoint of a matrix product state.
//
// Layout: the line "ZIGZAG-MPS\n", one line of JSON header, then the site
// tensors as little-endian IEEE-754 doubles. Site j is written densely as a
// Dl x d x Dr array in row-major order (right index fastest), with bond
// indices ordered even sector first and the physical index in level order.

#include <string>

#include "zigzag/dmrg.hpp"
#include "zigzag/mps.hpp"

namespace zigzag {

inline constexpr int kCheckpointFormatVersion = 1;

/// Write atomically (temporary file, then rename). `metadata` must be a JSON
/// object; it is stored under "metadata" in the header.
void write_checkpoint(const std::string& path, const MatrixProductState& psi, const ConvergenceReport& report,
                      const std::string& metadata = "{}");

struct Checkpoint {
    MatrixProductState state;
    ConvergenceReport report;
    std::string metadata;  ///< JSON text
};

Checkpoint read_checkpoint(const std::string& path);

}  // namespace zigzag
