#pragma once

#include <string>

#include "ctfid/engine.hpp"
#include "ctfid/graph.hpp"

namespace ctfid {

// Query grammar:
//   query   ::= 'P' '(' events ( '|' events )? ')'
//   events  ::= event ( ',' event )*
//   event   ::= NAME subscript? '=' VALUE
//   subscript ::= '[' NAME '=' ivalue ( ',' NAME '=' ivalue )* ']'
//   ivalue  ::= VALUE | NAME subscript
// Values must belong to the declared domain of their variable. Parse
// errors cite line and column.
Query parse_query(const std::string& text, const CausalDiagram& g);

}  // namespace ctfid
