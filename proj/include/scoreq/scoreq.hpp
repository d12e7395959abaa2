#ifndef SCOREQ_SCOREQ_HPP_
#define SCOREQ_SCOREQ_HPP_

#include "scoreq/core/autodiff.hpp"
#include "scoreq/core/gradcheck.hpp"
#include "scoreq/core/matrix.hpp"
#include "scoreq/data/corpus.hpp"
#include "scoreq/data/manifest.hpp"
#include "scoreq/data/sample.hpp"
#include "scoreq/eval/bootstrap.hpp"
#include "scoreq/eval/diagnostics.hpp"
#include "scoreq/eval/embedding.hpp"
#include "scoreq/eval/stats.hpp"
#include "scoreq/loss/mask.hpp"
#include "scoreq/loss/offline.hpp"
#include "scoreq/loss/scoreq_loss.hpp"
#include "scoreq/model/checkpoint.hpp"
#include "scoreq/model/model.hpp"
#include "scoreq/training/adam.hpp"
#include "scoreq/training/protocol.hpp"
#include "scoreq/training/trainer.hpp"

#endif  // SCOREQ_SCOREQ_HPP_
