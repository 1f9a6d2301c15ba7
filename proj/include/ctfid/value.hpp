#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace ctfid {

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct evaluation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Division by a zero-probability conditioning event during evaluation.
struct zero_conditioning_error : evaluation_error {
    using evaluation_error::evaluation_error;
};

// A value slot: either a concrete domain member or a summation symbol.
struct ValueRef {
    bool symbolic = false;
    std::string text;

    static ValueRef constant(std::string v) { return {false, std::move(v)}; }
    static ValueRef symbol(std::string s) { return {true, std::move(s)}; }

    bool operator==(const ValueRef& o) const {
        return symbolic == o.symbolic && text == o.text;
    }
    bool operator!=(const ValueRef& o) const { return !(*this == o); }
    bool operator<(const ValueRef& o) const {
        if (symbolic != o.symbolic) return symbolic < o.symbolic;
        return text < o.text;
    }
};

// True when the two refs denote the same value under every binding.
inline bool forced_equal(const ValueRef& a, const ValueRef& b) { return a == b; }

// True when some binding of the symbols makes the two refs differ.
inline bool possibly_different(const ValueRef& a, const ValueRef& b) { return !(a == b); }

inline std::string to_string(const ValueRef& v) { return v.text; }

// Hands out deterministic summation symbols: lowercase base, then prime marks.
class SymbolPool {
public:
    std::string fresh(const std::string& base) {
        std::string stem;
        for (char c : base) stem.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        std::string name = stem;
        while (used_.count(name)) name.push_back('\'');
        used_.insert(name);
        return name;
    }

    void reserve(const std::string& name) { used_.insert(name); }
    bool taken(const std::string& name) const { return used_.count(name) > 0; }

private:
    std::set<std::string> used_;
};

}  // namespace ctfid
