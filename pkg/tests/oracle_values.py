"""Reference numbers computed once with mpmath at 40 digits, independently of the package."""

TANH_1 = 0.76159415595576488812
TANH_2 = 0.96402758007581688395
TANH_1_SQ = 0.58002565838597393061
E_SQUARED = 7.3890560989306502272

# T=2 nearest-neighbour quadratic walk at alpha=0.5
ENDPOINT_SQ_T2 = 3.5231883119115297762
# T=3, alpha=0.5, probability that all three increments agree
WINDOW_T3 = 0.77580349257437592671
# T=4, alpha=0.25, E[x_4^2]
MSD_T4 = 7.8242843448327811519
# PowerLaw(2, 1.5), T=6, alpha=0.3: E[x_6^2] and E[phi_1 phi_4]
POWER_T6_ENDPOINT = 29.664302643003202734
POWER_T6_MONO_14 = 0.73338063164407839964

C_CRIT = 0.97381518900048373816
ALPHA_STAR_05 = 0.62322524014023051339
ALPHA_STAR_09 = 2.4578332697029315951
V2 = 1.8883855615856605450
V3 = 3.6922319267977762684

FOUR_TANH_12 = 3.3346184280486209805
FOUR_POINT_RATIO = 0.81822993339052379243
