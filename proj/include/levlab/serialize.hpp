#pragma once

#include <string>

#include "levlab/geometry.hpp"
#include "levlab/linalg.hpp"
#include "levlab/retrieval.hpp"
#include "levlab/types.hpp"

namespace levlab {

// JSON codecs. Schemas:
//   Hamiltonian {dim, entries: [[re,im],...] row-major, label}
//   EigenSystem {schema_version:"v1", dim, eigenvalues, rev, lev, condition}
//   RetrievedMode {kind, mode_idx, omega_n:[re,im], entries, method, quality}
//   BerryResult {theta, cumulative[], projections, steps, cycles}

std::string hamiltonian_to_json(const Hamiltonian& h);
Hamiltonian hamiltonian_from_json(const std::string& text);

std::string eigensystem_to_json(const EigenSystem& es);
EigenSystem eigensystem_from_json(const std::string& text);

std::string retrieved_mode_to_json(const RetrievedMode& m);
RetrievedMode retrieved_mode_from_json(const std::string& text);

std::string berry_result_to_json(const BerryResult& b);

/// SHA-256 digest as lowercase hex.
std::string sha256_hex(std::string_view data);

}  // namespace levlab
