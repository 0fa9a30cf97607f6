#include <catch2/catch_amalgamated.hpp>
#include "polysymp/polysymp.hpp"
