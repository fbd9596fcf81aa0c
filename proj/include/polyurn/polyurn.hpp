#pragma once

// Umbrella header.
#include "polyurn/catalog.hpp"
#include "polyurn/chain.hpp"
#include "polyurn/dag.hpp"
#include "polyurn/error.hpp"
#include "polyurn/fixed_point.hpp"
#include "polyurn/io.hpp"
#include "polyurn/multi_index.hpp"
#include "polyurn/random.hpp"
#include "polyurn/simplex.hpp"
#include "polyurn/tensor.hpp"
#include "polyurn/urn.hpp"
