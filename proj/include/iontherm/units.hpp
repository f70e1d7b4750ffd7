#pragma once

// Quantities with unit suffixes, e.g. "4e6 rad/s", "5 uK", "7.36 ms".
//
// Frequency suffixes Hz / kHz / MHz are cycles per second and are multiplied
// by 2 pi; rad/s, krad/s, Mrad/s are taken as angular frequencies directly.
// Everything is returned in SI (rad/s, K, s, rad).

#include <string>

namespace iontherm::units {

enum class Quantity { AngularFrequency, Temperature, Time, Angle };

std::string to_string(Quantity q);

/// Parses "<number> <unit>" (optionally quoted). With require_unit = false a
/// bare number is accepted as the SI value. Throws std::invalid_argument with
/// the offending text on failure.
double parse(const std::string& text, Quantity q, bool require_unit = true);

double angular_frequency(const std::string& text, bool require_unit = true);
double temperature(const std::string& text, bool require_unit = true);
double time(const std::string& text, bool require_unit = true);
double angle(const std::string& text, bool require_unit = true);

/// Removes surrounding whitespace and one pair of matching quotes.
std::string unquote(const std::string& text);

/// Shortest round-trip decimal form, used in canonicalized output.
std::string format(double value);

}  // namespace iontherm::units
