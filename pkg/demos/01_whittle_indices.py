"""Whittle indices of a single restless arm.

The index of a state is the passive subsidy that makes acting and not
acting equally attractive.  We compute it for a small deterministic arm
where the answer is known in closed form, check the indifference property,
and differentiate the index with respect to the reward vector.
"""

import numpy as np

from rmab_irl import subsidy_q_values, whittle_gradient, whittle_index

# A 2-state arm: acting moves state 0 to state 1, state 1 is absorbing,
# doing nothing leaves state 0 alone.  Rewards favour state 1.
P = np.zeros((2, 2, 2))
P[0, 0, 0] = 1.0
P[0, 1, 1] = 1.0
P[1, 0, 1] = 1.0
P[1, 1, 1] = 1.0
R = np.array([0.0, 1.0])
GAMMA = 0.5

w0 = whittle_index(P, R, state=0, gamma=GAMMA)
w1 = whittle_index(P, R, state=1, gamma=GAMMA)
print(f"index of state 0: {w0:.6f}   (acting is worth a subsidy of 1)")
print(f"index of state 1: {w1:.6f}   (nothing to gain, the state is absorbing)")

# At the index the two actions really are indifferent:
q = subsidy_q_values(P, R, subsidy=w0, gamma=GAMMA)
print(f"Q(0, passive) = {q.q[0, 0]:.9f}   Q(0, active) = {q.q[0, 1]:.9f}")

# The index is linear in the rewards once the optimal policy is frozen, so
# it has an exact gradient.  Raising R(1) raises the value of acting;
# raising R(0) makes staying put more comfortable.
grad = whittle_gradient(P, R, state=0, gamma=GAMMA)
print(f"d index(0) / d R = {grad}")

# Two structural properties worth knowing: adding a constant to all rewards
# changes nothing, and scaling rewards scales the index.
print(f"shift invariance: {whittle_index(P, R + 10.0, 0, GAMMA):.6f}")
print(f"scale by 3:       {whittle_index(P, 3.0 * R, 0, GAMMA):.6f}")
