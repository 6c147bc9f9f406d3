#include <doctest.h>

TEST_SUITE("nominal") {}
