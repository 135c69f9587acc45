#ifndef KPSEQ_KPSEQ_HPP_
#define KPSEQ_KPSEQ_HPP_

#include "kpseq/baselines.hpp"
#include "kpseq/corpus.hpp"
#include "kpseq/crf.hpp"
#include "kpseq/embeddings.hpp"
#include "kpseq/evaluate.hpp"
#include "kpseq/label.hpp"
#include "kpseq/model.hpp"
#include "kpseq/neural.hpp"
#include "kpseq/optimizer.hpp"
#include "kpseq/predictions.hpp"
#include "kpseq/synthetic.hpp"
#include "kpseq/tokenize.hpp"
#include "kpseq/training.hpp"

#endif  // KPSEQ_KPSEQ_HPP_
