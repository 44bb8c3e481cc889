#pragma once

#include <string>

#include "json.hpp"

#include "saddlelab/analysis.hpp"

namespace saddlelab {

nlohmann::json to_json(const Point& x);
nlohmann::json to_json(const CriticalPointInfo& info);
nlohmann::json to_json(const EscapeTimeReport& report);
nlohmann::json to_json(const TaylorCheckReport& report);
nlohmann::json to_json(const StableManifoldReport& report);
nlohmann::json to_json(const OrbitComparison& cmp);
nlohmann::json to_json(const GlobalBoundReport& report);
nlohmann::json to_json(const RadiusEstimate& est);
nlohmann::json to_json(const BallOccupancy& occ);

/// Canonical serialization used for payload files and hashing.
std::string dump_payload(const nlohmann::json& j);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(const std::string& bytes);

}  // namespace saddlelab
