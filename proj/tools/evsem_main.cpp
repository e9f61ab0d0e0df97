#include <iostream>

#include "evsem/cli.hpp"
#include "evsem/densem.hpp"

int main(int argc, char** argv) {
#ifdef EVSEM_MUTATION
  evsem::testing::set_mutation(static_cast<evsem::testing::Mutation>(EVSEM_MUTATION));
#endif
  return evsem::run_cli(argc, argv, std::cout, std::cerr);
}
