#include "manhattan_lab/cutpat.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "manhattan_lab/parallel.hpp"

namespace mlab {

ConnectionPattern identity_pattern(int width) {
  if (width < 1) throw ConfigError("pattern width must be positive");
  ConnectionPattern p;
  p.width = width;
  p.partner.resize(static_cast<std::size_t>(2 * width));
  for (int i = 0; i < width; ++i) {
    p.partner[i] = width + i;
    p.partner[width + i] = i;
  }
  return p;
}

ConnectionPattern compose(const ConnectionPattern& a, const ConnectionPattern& b) {
  if (a.width != b.width) throw ConfigError("cannot compose patterns of different widths");
  const int w = a.width;

  // Outer slots of the result: a's L side keeps indices 0..w-1, b's R side
  // keeps w..2w-1. Middle slot m is a.R_m glued to b.L_m.
  ConnectionPattern out;
  out.width = w;
  out.partner.assign(static_cast<std::size_t>(2 * w), -1);
  std::vector<std::uint8_t> middle_seen(static_cast<std::size_t>(w), 0);

  // Walk from an outer slot until another outer slot is reached. `in_a` says
  // which pattern's matching is applied next.
  auto resolve = [&](int slot, bool in_a) -> int {
    for (;;) {
      const int q = in_a ? a.partner[slot] : b.partner[slot];
      if (in_a) {
        if (q < w) return q;  // a.L
        const int m = q - w;
        middle_seen[m] = 1;
        slot = m;  // enter b through b.L_m
        in_a = false;
      } else {
        if (q >= w) return q;  // b.R
        middle_seen[q] = 1;
        slot = w + q;  // enter a through a.R_q
        in_a = true;
      }
    }
  };

  for (int i = 0; i < w; ++i) {
    if (out.partner[i] == -1) {
      const int t = resolve(i, true);
      out.partner[i] = t;
      out.partner[t] = i;
    }
  }
  for (int i = w; i < 2 * w; ++i) {
    if (out.partner[i] == -1) {
      const int t = resolve(i, false);
      out.partner[i] = t;
      out.partner[t] = i;
    }
  }

  std::uint64_t cycles = 0;
  for (int m = 0; m < w; ++m) {
    if (middle_seen[m]) continue;
    ++cycles;
    int cur = m;  // at middle slot cur, about to apply b
    do {
      middle_seen[cur] = 1;
      const int q = b.partner[cur];          // b.L_q, since cycles never touch b.R
      const int r = a.partner[w + q];        // a.R_r, likewise
      middle_seen[q] = 1;
      cur = r - w;
    } while (!middle_seen[cur]);
  }
  out.closed_loops = a.closed_loops + b.closed_loops + cycles;
  return out;
}

int crossing_count(const ConnectionPattern& p) {
  int n = 0;
  for (int i = 0; i < p.width; ++i) n += p.partner[i] >= p.width ? 1 : 0;
  return n;
}

namespace {

std::string slot_name(int slot, int width) {
  return slot < width ? "L" + std::to_string(slot) : "R" + std::to_string(slot - width);
}

}  // namespace

std::string to_string(const ConnectionPattern& p) {
  std::string out = "w=" + std::to_string(p.width) + ";pairs=";
  bool first = true;
  for (int s = 0; s < 2 * p.width; ++s) {
    const int t = p.partner[s];
    if (t < s) continue;
    if (!first) out += ',';
    first = false;
    out += "(" + slot_name(s, p.width) + "," + slot_name(t, p.width) + ")";
  }
  return out + ";loops=" + std::to_string(p.closed_loops);
}

ConnectionPattern parse_pattern(std::string_view text) {
  auto fail = [&]() -> ConfigError { return ConfigError("invalid pattern '" + std::string(text) + "'"); };
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw fail();
    return v;
  };
  if (!text.starts_with("w=")) throw fail();
  const auto p1 = text.find(";pairs=");
  const auto p2 = text.find(";loops=");
  if (p1 == std::string_view::npos || p2 == std::string_view::npos || p2 < p1) throw fail();

  ConnectionPattern p;
  p.width = static_cast<int>(number(text.substr(2, p1 - 2)));
  if (p.width < 1) throw fail();
  p.partner.assign(static_cast<std::size_t>(2 * p.width), -1);
  p.closed_loops = number(text.substr(p2 + 7));

  auto slot = [&](std::string_view s) -> int {
    if (s.size() < 2 || (s[0] != 'L' && s[0] != 'R')) throw fail();
    const auto idx = number(s.substr(1));
    if (idx >= static_cast<std::uint64_t>(p.width)) throw fail();
    return (s[0] == 'L' ? 0 : p.width) + static_cast<int>(idx);
  };
  std::string_view pairs = text.substr(p1 + 7, p2 - p1 - 7);
  while (!pairs.empty()) {
    if (pairs.front() != '(') throw fail();
    const auto close = pairs.find(')');
    const auto comma = pairs.find(',');
    if (close == std::string_view::npos || comma == std::string_view::npos || comma > close) throw fail();
    const int s = slot(pairs.substr(1, comma - 1));
    const int t = slot(pairs.substr(comma + 1, close - comma - 1));
    if (s == t || p.partner[s] != -1 || p.partner[t] != -1) throw fail();
    p.partner[s] = t;
    p.partner[t] = s;
    pairs.remove_prefix(close + 1);
    if (!pairs.empty()) {
      if (pairs.front() != ',') throw fail();
      pairs.remove_prefix(1);
    }
  }
  if (std::ranges::any_of(p.partner, [](int s) { return s < 0; })) throw fail();
  return p;
}

ConnectionPattern slab_pattern(const EnvironmentSpec& spec, const Slab& slab) {
  spec.validate();
  if (spec.geometry.kind() != GeometryKind::cylinder || !(slab.geometry == spec.geometry)) {
    throw ConfigError("slab_pattern needs a cylinder environment matching the slab");
  }
  return slab_pattern_with(spec.model, static_cast<int>(spec.geometry.width()), slab.x_min, slab.x_max,
                           [&](Point v) { return vertex_state(spec, v); });
}

std::vector<VertexState> decode_configuration(Model model, int width, int length, std::uint64_t index) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(length);
  std::vector<VertexState> states(n);
  const std::uint64_t base = model == Model::mirror ? 3 : 2;
  for (std::size_t k = 0; k < n; ++k) {
    const auto digit = index % base;
    index /= base;
    if (model == Model::mirror) {
      constexpr VertexState table[3] = {VertexState::empty, VertexState::ne, VertexState::nw};
      states[k] = table[digit];
    } else {
      states[k] = digit == 0 ? VertexState::empty : VertexState::mirror;
    }
  }
  return states;
}

ConnectionPattern configuration_pattern(Model model, int width, int length, const std::vector<VertexState>& states) {
  return slab_pattern_with(model, width, 0, length - 1, [&](Point v) {
    return states[static_cast<std::size_t>(v.x) * static_cast<std::size_t>(width) + static_cast<std::size_t>(v.y)];
  });
}

ParityScanResult exhaustive_parity_scan(int width, int length, unsigned workers, Model model, std::size_t max_witnesses) {
  if (width < 1 || length < 1) throw ConfigError("parity scan needs positive width and length");
  if (model == Model::manhattan && width % 2 != 0) throw ConfigError("manhattan requires even width");
  const std::uint64_t base = model == Model::mirror ? 3 : 2;
  std::uint64_t total = 1;
  for (int k = 0; k < width * length; ++k) {
    total *= base;
    if (total > kParityScanLimit) {
      throw ConfigError("parity scan too large: " + std::to_string(base) + "^" + std::to_string(width * length) +
                        " exceeds " + std::to_string(kParityScanLimit));
    }
  }

  struct Partial {
    int min_crossings = 1 << 30;
    std::uint64_t min_count = 0;
    std::vector<std::uint64_t> witnesses;
    std::vector<std::uint64_t> histogram;
    std::set<std::vector<int>> patterns;
    std::uint64_t parity_violations = 0;
  };

  const unsigned chunks = std::max(1u, std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(total)));
  std::vector<Partial> partials(chunks);
  parallel_chunks(total, chunks, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Partial& part = partials[chunk];
    part.histogram.assign(static_cast<std::size_t>(width) + 1, 0);
    for (std::uint64_t index = begin; index < end; ++index) {
      const auto states = decode_configuration(model, width, length, index);
      const auto pattern = configuration_pattern(model, width, length, states);
      const int crossings = crossing_count(pattern);
      ++part.histogram[static_cast<std::size_t>(crossings)];
      if ((crossings - width) % 2 != 0) ++part.parity_violations;
      part.patterns.insert(pattern.partner);
      if (crossings < part.min_crossings) {
        part.min_crossings = crossings;
        part.min_count = 0;
        part.witnesses.clear();
      }
      if (crossings == part.min_crossings) {
        ++part.min_count;
        if (part.witnesses.size() < max_witnesses) part.witnesses.push_back(index);
      }
    }
  });

  ParityScanResult result;
  result.model = model;
  result.width = width;
  result.length = length;
  result.configurations = total;
  result.crossing_histogram.assign(static_cast<std::size_t>(width) + 1, 0);
  result.min_crossings = 1 << 30;
  std::set<std::vector<int>> patterns;
  for (const Partial& part : partials) {
    if (part.histogram.empty()) continue;
    for (std::size_t c = 0; c < part.histogram.size(); ++c) result.crossing_histogram[c] += part.histogram[c];
    result.parity_violations += part.parity_violations;
    patterns.insert(part.patterns.begin(), part.patterns.end());
    if (part.min_crossings < result.min_crossings) {
      result.min_crossings = part.min_crossings;
      result.min_count = 0;
      result.witnesses.clear();
    }
    if (part.min_crossings == result.min_crossings) {
      result.min_count += part.min_count;
      // Chunks are visited in index order, so appending keeps the lowest indices.
      for (auto w : part.witnesses) {
        if (result.witnesses.size() < max_witnesses) result.witnesses.push_back(w);
      }
    }
  }
  result.distinct_patterns = patterns.size();
  return result;
}

}  // namespace mlab
