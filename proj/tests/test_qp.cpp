#include <doctest.h>

TEST_SUITE("qp") {}
