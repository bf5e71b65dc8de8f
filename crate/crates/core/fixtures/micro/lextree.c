/* Histogram binning over the active node list of a lexical tree. */

void lextree_hmm_histbin(lextree_t *lextree, int32 *list)
{
    int32 i;
    int32 ln;
    for (i = 0; i < lextree->n_active; i++) {
        ln = list[i];
    }
}
