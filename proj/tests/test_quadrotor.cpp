#include <doctest.h>

TEST_SUITE("quadrotor") {}
