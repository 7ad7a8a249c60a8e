#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace abba::advisor {

enum class Mode { Smbg, Cgm };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

inline constexpr int kMainMeals = 3;
/// meal_index used for the bedtime snack; main meals are 1..3.
inline constexpr int kSnackIndex = 0;
inline constexpr double kMinutesPerDay = 1440.0;

/// One flat daily basal rate (U/h) and a carbohydrate-to-insulin ratio (g/U)
/// for breakfast, lunch and dinner.
struct TherapyProfile {
    double br = 1.0;
    std::array<double, kMainMeals> cir{10.0, 10.0, 10.0};

    bool valid() const;
    friend bool operator==(const TherapyProfile&, const TherapyProfile&) = default;
};

struct GlucoseSample {
    double t = 0.0;  // minutes since the record day's midnight
    double mgdl = 0.0;
};

struct MealAnnouncement {
    double t = 0.0;
    double announced_cho = 0.0;
    int meal_index = 1;
};

/// Glucose readings of one day. Samples and announcements with t >= 1440
/// belong to the following morning; they close the last meal window and are
/// ignored by the basal features.
struct GlucoseDayRecord {
    Mode mode = Mode::Cgm;
    std::vector<GlucoseSample> samples;
    std::vector<MealAnnouncement> meals;

    /// Throws std::invalid_argument when timestamps are not strictly increasing,
    /// values are non-finite or non-positive, or a meal index is out of range.
    void validate() const;
};

}  // namespace abba::advisor
