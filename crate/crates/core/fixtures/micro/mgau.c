/* Gaussian mixture scoring over a sentinel-terminated id list. */

int32 mgau_eval(int32 *active)
{
    int32 j;
    int32 c;
    int32 score;
    score = 0;
    for (j = 0; active[j] >= 0; j++) {
        c = active[j];
        score = score + c;
    }
    return score;
}
