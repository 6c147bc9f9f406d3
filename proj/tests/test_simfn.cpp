#include <doctest.h>

TEST_SUITE("simfn") {}
