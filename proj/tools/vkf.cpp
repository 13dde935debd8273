#include "vkf/cli.hpp"

int main(int argc, char** argv) { return vkf::run_cli(argc, argv); }
