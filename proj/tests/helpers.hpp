#pragma once

#include <map>
#include <string>
#include <utility>

#include "ctfid/ctf.hpp"
#include "ctfid/graph.hpp"
#include "ctfid/value.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/" + name;
}

inline ctfid::ValueRef cst(const std::string& v) { return ctfid::ValueRef::constant(v); }
inline ctfid::ValueRef sym(const std::string& v) { return ctfid::ValueRef::symbol(v); }

inline ctfid::CtfVariable cv(std::string base,
                             std::map<std::string, ctfid::ValueRef> subscript = {}) {
    return {std::move(base), std::move(subscript)};
}

inline ctfid::CtfTerm ct(ctfid::CtfVariable var, ctfid::ValueRef value) {
    return {std::move(var), value};
}

}  // namespace testutil
