#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "fedcl/log.hpp"

int main(int argc, char** argv) {
  fedcl::log::set_level(fedcl::log::Level::error);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
