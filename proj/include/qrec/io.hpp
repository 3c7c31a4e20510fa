#pragma once

#include <string>

#include <json.hpp>

#include "qrec/absorption.hpp"
#include "qrec/channel.hpp"

namespace qrec::io {

using Json = nlohmann::ordered_json;

struct ChannelSpec {
  QuantumChannel channel;
  std::string label;
};

/// Channel document:
///   {"dim": d, "kraus": [[[re, im], ...] rows ...], "tolerances": {...}, "label": "..."}
/// Matrix entries may also be plain numbers. Structural problems raise
/// ParseError; a failed normalization raises NormalizationError.
/// `override_tol`, when given, replaces the document's tolerances.
ChannelSpec parse_channel_spec(const std::string& text, const Tolerances* override_tol = nullptr);
ChannelSpec load_channel_spec(const std::string& path, const Tolerances* override_tol = nullptr);
Json channel_spec_json(const QuantumChannel& channel, const std::string& label);

/// First line n, then n whitespace-separated rows of n probabilities.
ClassicalChain parse_chain(const std::string& text, const Tolerances& tol = {});
ClassicalChain load_chain(const std::string& path, const Tolerances& tol = {});

/// {"ambient_dim": n, "vectors": [[entry, ...], ...]}. The vectors need not
/// be orthonormal; the loaded subspace is their span.
Subspace parse_frame(const std::string& text, const Tolerances& tol = {});
Subspace load_frame(const std::string& path, const Tolerances& tol = {});

Json matrix_json(const CMatrix& m);
Json frame_json(const Subspace& s);
Json tolerances_json(const Tolerances& tol);

std::string read_file(const std::string& path);

}  // namespace qrec::io
