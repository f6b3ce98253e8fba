#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "crashbench/model.hpp"

namespace crashbench {

enum class OutcomeLevel { PoliceReported, AnyInjuryReported, AnyAirbagDeployment, SuspectedSeriousInjuryPlus, Fatal };

inline constexpr std::array<OutcomeLevel, 5> kOutcomeLevels{
    OutcomeLevel::PoliceReported, OutcomeLevel::AnyInjuryReported, OutcomeLevel::AnyAirbagDeployment,
    OutcomeLevel::SuspectedSeriousInjuryPlus, OutcomeLevel::Fatal};

class OutcomeSet {
public:
    void insert(OutcomeLevel level) { bits_ |= bit(level); }
    bool contains(OutcomeLevel level) const { return (bits_ & bit(level)) != 0; }
    std::size_t size() const;

    friend bool operator==(const OutcomeSet&, const OutcomeSet&) = default;

private:
    static std::uint8_t bit(OutcomeLevel level) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(level)); }
    std::uint8_t bits_ = 0;
};

enum class CrashType {
    V2VFrontToRear,
    V2VLateral,
    V2VOppositeDirection,
    Intersection,  // surface streets only
    SingleVehicle,
    Pedestrian,
    Cyclist,
    Motorcyclist,
    SecondaryCrash,
    UnknownOther
};

inline constexpr std::array<CrashType, 10> kCrashTypes{
    CrashType::V2VFrontToRear, CrashType::V2VLateral,  CrashType::V2VOppositeDirection, CrashType::Intersection,
    CrashType::SingleVehicle,  CrashType::Pedestrian,  CrashType::Cyclist,              CrashType::Motorcyclist,
    CrashType::SecondaryCrash, CrashType::UnknownOther};

/// Steps of the crash-type decision cascade.
enum class TaxonomyGate { Secondary, VulnerablePartner, Intersection, SingleVehicle, VehicleGeometry };

struct TaxonomyOptions {
    std::vector<TaxonomyGate> order{TaxonomyGate::Secondary, TaxonomyGate::VulnerablePartner, TaxonomyGate::Intersection,
                                    TaxonomyGate::SingleVehicle, TaxonomyGate::VehicleGeometry};
};

class UnknownEgo : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// PoliceReported always; injury levels from the crash-level worst injury
/// (Unknown counts as police-reported only); airbag if any unit deployed.
OutcomeSet classify_outcome(const CrashRecord& record);

/// Exactly one crash type for the ego unit. Gates that cannot be evaluated
/// from the available fields are passed over; a crash nothing matches is
/// UnknownOther. Throws UnknownEgo when `ego_unit_id` is not in the record.
CrashType classify_crash_type(const CrashRecord& record, int ego_unit_id, RoadClass road,
                              const TaxonomyOptions& options = {});

std::string_view to_string(OutcomeLevel level);
std::string_view to_string(CrashType type);
std::string_view to_string(TaxonomyGate gate);
std::optional<OutcomeLevel> parse_outcome_level(std::string_view s);
std::optional<CrashType> parse_crash_type(std::string_view s);
std::optional<TaxonomyGate> parse_taxonomy_gate(std::string_view s);

}  // namespace crashbench
