#include "pctf3d/coupling.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "pctf3d/rng.hpp"

namespace pctf3d {

namespace {

void check_var_count(int var_count, int least) {
    if (var_count < least) {
        throw std::invalid_argument("coupling: need at least " + std::to_string(least) +
                                    " variables, got " + std::to_string(var_count));
    }
}

void check_triplet_count(int var_count, int triplet_count) {
    const int lo = min_triplets(var_count);
    const long long hi = max_triplets(var_count);
    if (triplet_count < lo || triplet_count > hi) {
        throw std::invalid_argument("coupling: triplet count " + std::to_string(triplet_count) +
                                    " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "] for M=" + std::to_string(var_count));
    }
}

std::vector<Triplet> all_triplets(int var_count) {
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(max_triplets(var_count)));
    for (int a = 1; a <= var_count - 2; ++a)
        for (int b = a + 1; b <= var_count - 1; ++b)
            for (int c = b + 1; c <= var_count; ++c)
                out.push_back({a, b, c});
    return out;
}

// Disjoint-set union on variables 1..M.
class Dsu {
  public:
    explicit Dsu(int n) : parent_(static_cast<std::size_t>(n) + 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] =
                parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int x, int y) { parent_[static_cast<std::size_t>(find(x))] = find(y); }

  private:
    std::vector<int> parent_;
};

Triplet rotate_triplet(const Triplet& t, int shift, int var_count) {
    auto rot = [&](int p) { return (p - 1 + shift) % var_count + 1; };
    return make_triplet(rot(t.a), rot(t.b), rot(t.c));
}

std::string word_with_ones(int var_count, int p1, int p2, int p3) {
    std::string w(static_cast<std::size_t>(var_count), '0');
    w[static_cast<std::size_t>(p1 - 1)] = '1';
    w[static_cast<std::size_t>(p2 - 1)] = '1';
    w[static_cast<std::size_t>(p3 - 1)] = '1';
    return w;
}

// "0...0111": its rotations supply remainder triplets one at a time.
std::string reserved_word(int var_count) {
    return word_with_ones(var_count, var_count - 2, var_count - 1, var_count);
}

// Period-(M/3) word whose M/3 distinct rotations partition the variables;
// these triplets belong to no Lyndon-word orbit.
std::string periodic_word(int var_count) {
    const int third = var_count / 3;
    return word_with_ones(var_count, third, 2 * third, var_count);
}

bool is_lyndon(const std::string& w) {
    const std::size_t n = w.size();
    for (std::size_t s = 1; s < n; ++s) {
        // compare w against its rotation by s
        bool greater = false, less = false;
        for (std::size_t i = 0; i < n; ++i) {
            const char a = w[i], b = w[(i + s) % n];
            if (a != b) {
                less = a < b;
                greater = a > b;
                break;
            }
        }
        if (greater || (!less && !greater)) {
            return false; // some rotation is smaller or equal (periodic)
        }
    }
    return true;
}

// Picks `take` of `n` cyclic offsets spread as evenly as possible: the
// omitted offsets follow the Beatty sequence ceil((j+1)*n/q)-1, so the kept
// pattern is balanced and window sums stay within one of each other.
std::vector<int> balanced_offsets(int n, int take) {
    std::vector<bool> omit(static_cast<std::size_t>(n), false);
    const int q = n - take;
    for (int j = 0; j < q; ++j) {
        const long long s = (static_cast<long long>(j) + 1) * n + q - 1;
        omit[static_cast<std::size_t>(s / q - 1)] = true;
    }
    std::vector<int> kept;
    kept.reserve(static_cast<std::size_t>(take));
    for (int s = 0; s < n; ++s) {
        if (!omit[static_cast<std::size_t>(s)]) {
            kept.push_back(s);
        }
    }
    return kept;
}

void append_rotations(std::vector<Triplet>& out, const std::string& word,
                      const std::vector<int>& offsets) {
    const int m = static_cast<int>(word.size());
    const Triplet base = triplet_from_word(word);
    for (int s : offsets) {
        out.push_back(rotate_triplet(base, s, m));
    }
}

// Completion used when T < M: grow a '+2' seed one triplet at a time,
// preferring triplets that lift minimum-degree variables and introduce pairs
// not yet covered by any triplet, with seeded random tie-breaking.
Coupling balanced_below_m(int var_count, int triplet_count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Triplet> chosen = gen_plus2(var_count).triplets();
    std::set<Triplet> used(chosen.begin(), chosen.end());
    std::set<std::pair<int, int>> pairs;
    std::vector<int> deg(static_cast<std::size_t>(var_count) + 1, 0);
    auto note = [&](const Triplet& t) {
        ++deg[static_cast<std::size_t>(t.a)];
        ++deg[static_cast<std::size_t>(t.b)];
        ++deg[static_cast<std::size_t>(t.c)];
        pairs.insert({t.a, t.b});
        pairs.insert({t.a, t.c});
        pairs.insert({t.b, t.c});
    };
    for (const Triplet& t : chosen) {
        note(t);
    }
    const std::vector<Triplet> pool = all_triplets(var_count);

    while (static_cast<int>(chosen.size()) < triplet_count) {
        const int dmin = *std::min_element(deg.begin() + 1, deg.end());
        int best_step = std::numeric_limits<int>::max();
        int best_cover = -1;
        int best_repeats = 4;
        std::vector<Triplet> ties;
        for (const Triplet& t : pool) {
            if (used.count(t)) {
                continue;
            }
            ++deg[static_cast<std::size_t>(t.a)];
            ++deg[static_cast<std::size_t>(t.b)];
            ++deg[static_cast<std::size_t>(t.c)];
            const auto [lo, hi] = std::minmax_element(deg.begin() + 1, deg.end());
            const int st = *hi - *lo;
            --deg[static_cast<std::size_t>(t.a)];
            --deg[static_cast<std::size_t>(t.b)];
            --deg[static_cast<std::size_t>(t.c)];
            const int cover = (deg[static_cast<std::size_t>(t.a)] == dmin) +
                              (deg[static_cast<std::size_t>(t.b)] == dmin) +
                              (deg[static_cast<std::size_t>(t.c)] == dmin);
            const int repeats = static_cast<int>(pairs.count({t.a, t.b})) +
                                static_cast<int>(pairs.count({t.a, t.c})) +
                                static_cast<int>(pairs.count({t.b, t.c}));
            const auto key = std::tuple(st, -cover, repeats);
            if (key < std::tuple(best_step, -best_cover, best_repeats)) {
                best_step = st;
                best_cover = cover;
                best_repeats = repeats;
                ties.clear();
            }
            if (key == std::tuple(best_step, -best_cover, best_repeats)) {
                ties.push_back(t);
            }
        }
        const Triplet pick = ties[rng.uniform_int(ties.size())];
        chosen.push_back(pick);
        used.insert(pick);
        note(pick);
    }
    return {var_count, std::move(chosen)};
}

} // namespace

Triplet make_triplet(int x, int y, int z) {
    if (x == y || x == z || y == z) {
        throw std::invalid_argument("triplet: indices must be distinct");
    }
    Triplet t{x, y, z};
    if (t.a > t.b) std::swap(t.a, t.b);
    if (t.b > t.c) std::swap(t.b, t.c);
    if (t.a > t.b) std::swap(t.a, t.b);
    return t;
}

Coupling::Coupling(int var_count, std::vector<Triplet> triplets)
    : var_count_(var_count), triplets_(std::move(triplets)) {
    check_var_count(var_count_, 3);
    std::sort(triplets_.begin(), triplets_.end());
    if (std::adjacent_find(triplets_.begin(), triplets_.end()) != triplets_.end()) {
        throw std::invalid_argument("coupling: duplicate triplet");
    }
    for (const Triplet& t : triplets_) {
        if (t.a < 1 || t.c > var_count_ || t.a >= t.b || t.b >= t.c) {
            throw std::invalid_argument("coupling: triplet indices out of range 1.." +
                                        std::to_string(var_count_));
        }
    }
}

bool Coupling::contains(const Triplet& t) const {
    return std::binary_search(triplets_.begin(), triplets_.end(), t);
}

std::vector<int> degree_sequence(const Coupling& c) {
    std::vector<int> deg(static_cast<std::size_t>(c.var_count()), 0);
    for (const Triplet& t : c.triplets()) {
        ++deg[static_cast<std::size_t>(t.a - 1)];
        ++deg[static_cast<std::size_t>(t.b - 1)];
        ++deg[static_cast<std::size_t>(t.c - 1)];
    }
    return deg;
}

int step(const Coupling& c) {
    const std::vector<int> deg = degree_sequence(c);
    const auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
    return *hi - *lo;
}

bool is_connected(const Coupling& c) {
    if (c.size() == 0) {
        return false;
    }
    Dsu dsu(c.var_count());
    for (const Triplet& t : c.triplets()) {
        dsu.unite(t.a, t.b);
        dsu.unite(t.a, t.c);
    }
    const std::vector<int> deg = degree_sequence(c);
    const int root = dsu.find(1);
    for (int m = 1; m <= c.var_count(); ++m) {
        if (deg[static_cast<std::size_t>(m - 1)] == 0 || dsu.find(m) != root) {
            return false;
        }
    }
    return true;
}

long long max_triplets(int var_count) {
    const long long m = var_count;
    return m * (m - 1) * (m - 2) / 6;
}

int min_triplets(int var_count) { return var_count / 2; }

Coupling gen_plus2(int var_count) {
    check_var_count(var_count, 4);
    std::vector<Triplet> triplets;
    // chain 1-2-3, 3-4-5, 5-6-7, ... closing onto variable 1 when M is even
    for (int start = 1; start + 2 <= var_count; start += 2) {
        triplets.push_back(make_triplet(start, start + 1, start + 2));
    }
    if (var_count % 2 == 0) {
        triplets.push_back(make_triplet(var_count - 1, var_count, 1));
    }
    return {var_count, std::move(triplets)};
}

Coupling gen_plus1(int var_count) {
    check_var_count(var_count, 4);
    std::vector<Triplet> triplets;
    for (int m = 0; m < var_count; ++m) {
        triplets.push_back(make_triplet(m + 1, (m + 1) % var_count + 1,
                                        (m + 2) % var_count + 1));
    }
    return {var_count, std::move(triplets)};
}

Coupling gen_full(int var_count) {
    check_var_count(var_count, 3);
    return {var_count, all_triplets(var_count)};
}

Coupling gen_random(int var_count, int triplet_count, std::uint64_t seed) {
    check_var_count(var_count, 3);
    check_triplet_count(var_count, triplet_count);
    const std::vector<Triplet> pool = all_triplets(var_count);
    const auto total = static_cast<std::uint64_t>(pool.size());
    Rng rng(seed);
    constexpr int kRetryBudget = 10000;
    for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
        // Floyd's algorithm: uniform over T-subsets of the triplet pool.
        std::set<std::uint64_t> picked;
        for (std::uint64_t j = total - static_cast<std::uint64_t>(triplet_count); j < total; ++j) {
            const std::uint64_t k = rng.uniform_int(j + 1);
            picked.insert(picked.count(k) ? j : k);
        }
        std::vector<Triplet> triplets;
        triplets.reserve(picked.size());
        for (std::uint64_t idx : picked) {
            triplets.push_back(pool[static_cast<std::size_t>(idx)]);
        }
        Coupling c(var_count, std::move(triplets));
        if (is_connected(c)) {
            return c;
        }
    }
    throw std::runtime_error("gen_random: no connected coupling found within retry budget");
}

std::vector<std::string> lyndon_words(int var_count) {
    check_var_count(var_count, 3);
    std::vector<std::string> words;
    for (int a = 1; a <= var_count - 2; ++a)
        for (int b = a + 1; b <= var_count - 1; ++b)
            for (int c = b + 1; c <= var_count; ++c) {
                std::string w = word_with_ones(var_count, a, b, c);
                if (is_lyndon(w)) {
                    words.push_back(std::move(w));
                }
            }
    std::sort(words.begin(), words.end());
    return words;
}

Triplet triplet_from_word(const std::string& word) {
    int pos[3];
    int found = 0;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] == '1') {
            if (found == 3) {
                throw std::invalid_argument("triplet word: more than three '1' symbols");
            }
            pos[found++] = static_cast<int>(i) + 1;
        } else if (word[i] != '0') {
            throw std::invalid_argument("triplet word: symbols must be '0' or '1'");
        }
    }
    if (found != 3) {
        throw std::invalid_argument("triplet word: expected exactly three '1' symbols");
    }
    return make_triplet(pos[0], pos[1], pos[2]);
}

std::vector<Triplet> word_rotation_orbit(const std::string& word) {
    const int m = static_cast<int>(word.size());
    const Triplet base = triplet_from_word(word);
    std::set<Triplet> orbit;
    for (int s = 0; s < m; ++s) {
        orbit.insert(rotate_triplet(base, s, m));
    }
    return {orbit.begin(), orbit.end()};
}

Coupling gen_balanced(int var_count, int triplet_count, std::uint64_t seed) {
    check_var_count(var_count, 3);
    check_triplet_count(var_count, triplet_count);
    if (var_count == 3) {
        return gen_full(3);
    }
    if (triplet_count < var_count) {
        return balanced_below_m(var_count, triplet_count, seed);
    }

    // Full rotation orbits of Lyndon words, then remainders drawn evenly from
    // the periodic orbit (when 3 | M) and the reserved word's rotations.
    const std::vector<std::string> words = lyndon_words(var_count);
    const std::string reserved = reserved_word(var_count);
    std::vector<std::string> orbit_order;
    for (const std::string& w : words) {
        if (w != reserved) {
            orbit_order.push_back(w);
        }
    }
    orbit_order.push_back(reserved); // used as a full orbit only when all words are needed

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(triplet_count));
    const int orbits = triplet_count / var_count;
    for (int i = 0; i < orbits; ++i) {
        std::vector<int> all(static_cast<std::size_t>(var_count));
        std::iota(all.begin(), all.end(), 0);
        append_rotations(triplets, orbit_order[static_cast<std::size_t>(i)], all);
    }

    int remaining = triplet_count - orbits * var_count;
    if (remaining > 0 && var_count % 3 == 0) {
        const int third = var_count / 3;
        const int take = std::min(remaining, third);
        append_rotations(triplets, periodic_word(var_count), balanced_offsets(third, take));
        remaining -= take;
    }
    if (remaining > 0) {
        append_rotations(triplets, reserved, balanced_offsets(var_count, remaining));
    }
    return {var_count, std::move(triplets)};
}

Coupling parse_coupling(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int var_count = -1;
    std::vector<Triplet> triplets;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::string body = line.substr(first);
        if (var_count < 0) {
            if (body.rfind("M=", 0) != 0) {
                throw std::invalid_argument("coupling text: expected 'M=<int>' at line " +
                                            std::to_string(line_no));
            }
            try {
                var_count = std::stoi(body.substr(2));
            } catch (const std::exception&) {
                throw std::invalid_argument("coupling text: bad variable count at line " +
                                            std::to_string(line_no));
            }
            continue;
        }
        std::istringstream fields(body);
        int x, y, z;
        std::string extra;
        if (!(fields >> x >> y >> z) || (fields >> extra)) {
            throw std::invalid_argument("coupling text: expected three indices at line " +
                                        std::to_string(line_no));
        }
        try {
            triplets.push_back(make_triplet(x, y, z));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(e.what()) + " at line " +
                                        std::to_string(line_no));
        }
    }
    if (var_count < 0) {
        throw std::invalid_argument("coupling text: missing 'M=<int>' header");
    }
    return {var_count, std::move(triplets)};
}

std::string format_coupling(const Coupling& c) {
    std::ostringstream out;
    out << "M=" << c.var_count() << "\n";
    for (const Triplet& t : c.triplets()) {
        out << t.a << " " << t.b << " " << t.c << "\n";
    }
    return out.str();
}

std::uint64_t coupling_hash(const Coupling& c) {
    const std::string text = format_coupling(c);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace pctf3d
