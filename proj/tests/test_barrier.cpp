#include <doctest.h>

TEST_SUITE("barrier") {}
