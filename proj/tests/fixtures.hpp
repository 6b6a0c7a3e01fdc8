#pragma once

#include <string>

#include "lqvrp/instance.hpp"

namespace fixtures {

// Depot at the origin, customers on a 3-4-5 triangle.
inline const char* kPythagoras = R"(NAME : pythagoras
COMMENT : hand fixture
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 0 3
3 4 0
4 3 4
DEMAND_SECTION
1 0
2 4
3 5
4 1
DEPOT_SECTION
1
-1
EOF
)";

inline lqvrp::Instance pythagoras() { return lqvrp::parse_vrp(kPythagoras); }

// Same geometry with two customers only: (0,3) and (4,0).
inline lqvrp::Instance triangle(double d1 = 4, double d2 = 5, double capacity = 10, int k = 2) {
  using lqvrp::Node;
  return lqvrp::Instance("triangle", {Node{0, 0, 0, 0, {}}, Node{1, 0, 3, d1, {}}, Node{2, 4, 0, d2, {}}},
                         capacity, k);
}

inline std::string data_path(const std::string& file) { return std::string(LQVRP_TEST_DATA) + "/" + file; }

}  // namespace fixtures
