#pragma once

#include "bakelabel/error.hpp"
#include "bakelabel/eval.hpp"
#include "bakelabel/filters.hpp"
#include "bakelabel/geometry.hpp"
#include "bakelabel/interchange.hpp"
#include "bakelabel/io.hpp"
#include "bakelabel/parallel.hpp"
#include "bakelabel/propagate.hpp"
#include "bakelabel/weaklabel.hpp"
