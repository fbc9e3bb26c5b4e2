#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "opera/error.hpp"

namespace opera {

// UTC instant with millisecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

inline Timestamp from_epoch_ms(std::int64_t ms) {
  return Timestamp{std::chrono::milliseconds{ms}};
}

inline Timestamp from_epoch_seconds(double s) {
  return from_epoch_ms(static_cast<std::int64_t>(std::llround(s * 1000.0)));
}

inline std::int64_t epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }

// Signed difference `to - from` in seconds.
inline double seconds_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 1000.0;
}

namespace detail {

class TimestampCursor {
 public:
  explicit TimestampCursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  void advance() { ++pos_; }

  int digits(std::size_t count) {
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
      char c = peek();
      if (c < '0' || c > '9') fail();
      value = value * 10 + (c - '0');
      advance();
    }
    return value;
  }

  void expect(char c) {
    if (peek() != c) fail();
    advance();
  }

  [[noreturn]] void fail() const {
    throw TimestampError("unparseable timestamp '" + std::string(text_) + "'");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses RFC 3339 (`2021-03-04T05:06:07.890+01:00`). A space may replace the
// `T`; a missing zone designator is read as UTC.
inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  detail::TimestampCursor in(text);
  const int y = in.digits(4);
  in.expect('-');
  const int mo = in.digits(2);
  in.expect('-');
  const int d = in.digits(2);
  const char sep = in.peek();
  if (sep != 'T' && sep != 't' && sep != ' ') in.fail();
  in.advance();
  const int hh = in.digits(2);
  in.expect(':');
  const int mm = in.digits(2);
  in.expect(':');
  const int ss = in.digits(2);

  int ms = 0;
  if (in.peek() == '.' || in.peek() == ',') {
    in.advance();
    int scale = 100;
    bool any = false;
    while (in.peek() >= '0' && in.peek() <= '9') {
      ms += (in.peek() - '0') * scale;
      scale /= 10;
      any = true;
      in.advance();
    }
    if (!any) in.fail();
  }

  int offset_minutes = 0;
  if (!in.done()) {
    const char z = in.peek();
    if (z == 'Z' || z == 'z') {
      in.advance();
    } else if (z == '+' || z == '-') {
      in.advance();
      const int oh = in.digits(2);
      if (in.peek() == ':') in.advance();
      const int om = in.digits(2);
      offset_minutes = (z == '+' ? 1 : -1) * (oh * 60 + om);
    } else {
      in.fail();
    }
  }
  if (!in.done()) in.fail();

  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)},
                            day{static_cast<unsigned>(d)}};
  if (!date.ok() || hh > 23 || mm > 59 || ss > 60) in.fail();

  return time_point_cast<milliseconds>(sys_days{date}) + hours{hh} +
         minutes{mm} + seconds{ss} + milliseconds{ms} -
         minutes{offset_minutes};
}

// Canonical RFC 3339 rendering in UTC; the fractional part appears only
// when the instant is not on a whole second.
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day date{day_start};
  const hh_mm_ss<milliseconds> tod{t - day_start};
  char buf[40];
  const long long ms = tod.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()),
                  static_cast<unsigned>(date.day()),
                  static_cast<long long>(tod.hours().count()),
                  static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()),
                  static_cast<unsigned>(date.day()),
                  static_cast<long long>(tod.hours().count()),
                  static_cast<long long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()), ms);
  }
  return buf;
}

// Accepts RFC 3339 or a plain number of seconds since the epoch.
inline Timestamp parse_time_bound(std::string_view text) {
  if (text.empty()) throw TimestampError("empty time bound");
  std::size_t used = 0;
  try {
    const double seconds = std::stod(std::string(text), &used);
    if (used == text.size()) return from_epoch_seconds(seconds);
  } catch (const std::exception&) {
  }
  return parse_timestamp(text);
}

// Renders a duration as `4d 11h`, `1m 30s`, `0s`. Zero components are
// omitted; sub-second remainders show as a decimal on the seconds part.
inline std::string format_duration(double seconds) {
  if (!std::isfinite(seconds)) return "n/a";
  std::string out;
  long long ms = std::llround(seconds * 1000.0);
  if (ms < 0) {
    out += '-';
    ms = -ms;
  }
  const long long d = ms / 86'400'000;
  const long long h = ms / 3'600'000 % 24;
  const long long m = ms / 60'000 % 60;
  const long long s = ms / 1000 % 60;
  const long long frac = ms % 1000;

  std::string body;
  auto part = [&body](long long v, const char* unit) {
    if (v == 0) return;
    if (!body.empty()) body += ' ';
    body += std::to_string(v) + unit;
  };
  part(d, "d");
  part(h, "h");
  part(m, "m");
  if (s != 0 || frac != 0) {
    if (!body.empty()) body += ' ';
    body += std::to_string(s);
    if (frac != 0) {
      char buf[8];
      std::snprintf(buf, sizeof buf, ".%03lld", frac);
      std::string f = buf;
      while (f.back() == '0') f.pop_back();
      body += f;
    }
    body += 's';
  }
  if (body.empty()) return "0s";
  return out + body;
}

}  // namespace opera
