#include "jumpchain/cli.hpp"

int main(int argc, char** argv) { return jumpchain::parse_and_dispatch(argc, argv); }
