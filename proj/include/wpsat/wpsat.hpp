#pragma once

#include "wpsat/formula.hpp"
#include "wpsat/dimacs.hpp"
#include "wpsat/rng.hpp"
#include "wpsat/generator.hpp"
#include "wpsat/factor_graph.hpp"
#include "wpsat/wp_engine.hpp"
#include "wpsat/residual_solver.hpp"
#include "wpsat/analysis.hpp"
#include "wpsat/cycle_process.hpp"
#include "wpsat/harness.hpp"
