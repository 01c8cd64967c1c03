#include <catch2/catch_amalgamated.hpp>
#include "pathprop/modes.hpp"
TEST_CASE("modes placeholder", "[modes]") { CHECK(true); }
