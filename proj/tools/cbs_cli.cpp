#include <iostream>

#include "cbs/cli_app.hpp"

int main(int argc, char** argv)
{
    return cbs::cli::run(argc, argv, std::cout, std::cerr);
}
