#pragma once

#include "monodiff/error.hpp"
#include "monodiff/grid.hpp"
#include "monodiff/expression.hpp"
#include "monodiff/field.hpp"
#include "monodiff/splitting.hpp"
#include "monodiff/stencil.hpp"
#include "monodiff/assembly.hpp"
#include "monodiff/solver.hpp"
#include "monodiff/pipeline.hpp"
#include "monodiff/verification.hpp"
#include "monodiff/problems.hpp"
#include "monodiff/io.hpp"
