#include "tqdsim/scenario.hpp"

int main(int argc, char** argv) {
    return tqdsim::cli_main(argc, argv);
}
