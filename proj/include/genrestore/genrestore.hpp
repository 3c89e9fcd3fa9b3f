#pragma once

#include "genrestore/analysis.hpp"
#include "genrestore/constraining.hpp"
#include "genrestore/diffusion.hpp"
#include "genrestore/em.hpp"
#include "genrestore/guidance.hpp"
#include "genrestore/io.hpp"
#include "genrestore/mixture_prior.hpp"
#include "genrestore/parallel.hpp"
#include "genrestore/random.hpp"
#include "genrestore/reference.hpp"
#include "genrestore/restoration.hpp"
#include "genrestore/stats.hpp"
#include "genrestore/sweeps.hpp"
#include "genrestore/theory.hpp"
#include "genrestore/types.hpp"
