#include <catch2/catch_amalgamated.hpp>

#include "fasttls/fasttls.hpp"
