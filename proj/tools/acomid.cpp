#include "acomid/experiment.hpp"

int main(int argc, char** argv) { return acomid::cli_main(argc, argv); }
