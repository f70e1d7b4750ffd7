#include "iontherm/units.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "iontherm/core.hpp"

namespace iontherm::units {

namespace {

const std::map<std::string, double>& table(Quantity q) {
  static const std::map<std::string, double> freq = {
      {"rad/s", 1.0},         {"krad/s", 1e3},          {"Mrad/s", 1e6},
      {"Hz", 2 * kPi},        {"kHz", 2 * kPi * 1e3},   {"MHz", 2 * kPi * 1e6}};
  static const std::map<std::string, double> temp = {
      {"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"µK", 1e-6}, {"μK", 1e-6}, {"nK", 1e-9}};
  static const std::map<std::string, double> time = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"μs", 1e-6}};
  static const std::map<std::string, double> angle = {{"rad", 1.0}, {"deg", kPi / 180.0}};
  switch (q) {
    case Quantity::AngularFrequency: return freq;
    case Quantity::Temperature: return temp;
    case Quantity::Time: return time;
    case Quantity::Angle: return angle;
  }
  return angle;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::AngularFrequency: return "angular frequency";
    case Quantity::Temperature: return "temperature";
    case Quantity::Time: return "time";
    case Quantity::Angle: return "angle";
  }
  return "?";
}

std::string unquote(const std::string& text) {
  std::string s = trim(text);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = trim(s.substr(1, s.size() - 2));
  return s;
}

double parse(const std::string& text, Quantity q, bool require_unit) {
  const std::string s = unquote(text);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first)
    throw std::invalid_argument("cannot parse " + to_string(q) + " from '" + text + "'");
  const std::string unit = trim(std::string(ptr, last));
  if (unit.empty()) {
    if (require_unit) {
      std::string allowed;
      for (const auto& [k, _] : table(q)) allowed += (allowed.empty() ? "" : ", ") + k;
      throw std::invalid_argument(to_string(q) + " '" + text + "' needs a unit (" + allowed + ")");
    }
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite " + to_string(q) + " '" + text + "'");
    return value;
  }
  const auto& t = table(q);
  const auto it = t.find(unit);
  if (it == t.end()) throw std::invalid_argument("unknown " + to_string(q) + " unit '" + unit + "' in '" + text + "'");
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite " + to_string(q) + " '" + text + "'");
  return value * it->second;
}

double angular_frequency(const std::string& text, bool require_unit) {
  return parse(text, Quantity::AngularFrequency, require_unit);
}
double temperature(const std::string& text, bool require_unit) { return parse(text, Quantity::Temperature, require_unit); }
double time(const std::string& text, bool require_unit) { return parse(text, Quantity::Time, require_unit); }
double angle(const std::string& text, bool require_unit) { return parse(text, Quantity::Angle, require_unit); }

std::string format(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace iontherm::units
