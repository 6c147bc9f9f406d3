#include <doctest.h>

TEST_SUITE("sim") {}
