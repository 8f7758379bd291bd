// 256-layer ziggurat tables for the standard normal distribution.
// Generated by the closure construction described in rng/mod.rs:
// unnormalized density f(x) = exp(-x^2/2), 256 equal-area blocks,
// X[0] = V/f(R) (virtual base-strip width), X[1] = R, X[256] = 0,
// f(X[i+1]) = f(X[i]) + V/X[i]; R solved so the recursion closes at f(0)=1
// (closure residual -1.1e-16). Literals are shortest-roundtrip, bit-exact.

pub(crate) const ZIG_NORM_R: f64 = 3.654152885360998;
#[rustfmt::skip]
pub(crate) const ZIG_NORM_X: [f64; 257] = [
    3.910757959524763, 3.654152885360998, 3.4492782985614254, 3.3202447338398215,
    3.2245750520477987, 3.147889289517998, 3.083526132002141, 3.027837791769592,
    2.978603279881842, 2.9343668672088863, 2.894121053613411, 2.857138730873224,
    2.8228773968264425, 2.790921174001927, 2.760944005279986, 2.7326853590440114,
    2.705933656123062, 2.6805146432857447, 2.656283037576743, 2.6331163936315822,
    2.610910518488823, 2.589575986708286, 2.5690354526818435, 2.549221550324783,
    2.530075232159854, 2.511544441626694, 2.4935830412710467, 2.476149939670523,
    2.459208374334705, 2.442725318200364, 2.4266709849371466, 2.4110184139011195,
    2.3957431197819274, 2.3808227951720857, 2.366237056717291, 2.3519672273791445,
    2.3379961487965284, 2.3243080188711325, 2.310888250601372, 2.2977233489028634,
    2.284800802724492, 2.2721089902283813, 2.259637095173787, 2.247375032947389,
    2.235313384929921, 2.22344334009251, 2.2117566428841604, 2.200245546611276,
    2.1889027716263603, 2.1777214677402923, 2.1666951803543077, 2.1558178198767366,
    2.145083634047888, 2.134487182846016, 2.1240233156895227, 2.1136871506866526,
    2.1034740557148766, 2.0933796311387916, 2.083399693998304, 2.0735302635187427,
    2.063767547811732, 2.054107931650652, 2.0445479652175313, 2.035084353729619,
    2.025713947863854, 2.016433734906204, 2.0072408305605287, 1.9981324713584196,
    1.989106007617438, 1.9801588969004766, 1.9712886979336592, 1.962493064944363,
    1.9537697423846467, 1.9451165600086784, 1.9365314282756947, 1.9280123340526658,
    1.9195573365931882, 1.9111645637712535, 1.9028322085504297, 1.8945585256707052,
    1.8863418285367832, 1.8781804862929963, 1.8700729210712672, 1.8620176053996746,
    1.8540130597602023, 1.8460578502851857, 1.8381505865828067, 1.830289919682757,
    1.8224745400938858, 1.8147031759662826, 1.8069745913508208, 1.7992875845497203,
    1.7916409865521625, 1.7840336595494415, 1.7764644955245228, 1.7689324149112684,
    1.7614363653189102, 1.7539753203176716, 1.7465482782817225, 1.7391542612859117,
    1.7317923140529632, 1.7244615029480448, 1.7171609150178229, 1.7098896570713016,
    1.702646854799923, 1.6954316519345614, 1.688243209437195, 1.6810807047251735,
    1.6739433309261247, 1.666830296161665, 1.659740822858182, 1.6526741470830553,
    1.6456295179047817, 1.638606196775547, 1.6316034569348727, 1.624620582833034,
    1.617656869573015, 1.6107116223698297, 1.6037841560260941, 1.5968737944227878,
    1.5899798700241905, 1.583101723396029, 1.576238702735906, 1.5693901634151233,
    1.5625554675310445, 1.5557339834691761, 1.5489250854741732, 1.5421281532290017,
    1.5353425714415139, 1.528567729437712, 1.5218030207609978, 1.5150478427767144,
    1.5083015962813113, 1.5015636851154637, 1.4948335157804935, 1.4881104970574472,
    1.481394039628187, 1.4746835556978553, 1.4679784586180793, 1.4612781625102753,
    1.45458208188841, 1.4478896312805758, 1.4412002248487237, 1.4345132760058918,
    1.4278281970302555, 1.4211443986753085, 1.4144612897754707, 1.4077782768463984,
    1.4010947636792506, 1.3944101509281406, 1.3877238356899757, 1.381035211075855,
    1.374343665773166, 1.3676485835974759, 1.3609493430332826, 1.3542453167626347,
    1.347535871180587, 1.3408203658964037, 1.3340981532193599, 1.3273685776279256,
    1.3206309752210559, 1.3138846731502203, 1.307128989030731, 1.300363230330837,
    1.2935866937369476, 1.2867986644932434, 1.2799984157138176, 1.273185207665356,
    1.266358287018229, 1.2595168860637138, 1.2526602218948968, 1.2457874955486268,
    1.2388978911056867, 1.2319905747461355, 1.2250646937565302, 1.218119375485481,
    1.2111537262436987, 1.2041668301443809, 1.1971577478794408, 1.1901255154266914,
    1.1830691426826863, 1.1759876120154515, 1.1688798767308328, 1.161744859445611,
    1.1545814503599272, 1.1473885054208484, 1.1401648443681507, 1.1329092486525332,
    1.1256204592155326, 1.1182971741193444, 1.110938046013575, 1.103541679424639,
    1.0961066278520208, 1.0886313906539793, 1.0811144097034033, 1.0735540657924356,
    1.0659486747621219, 1.0582964833306743, 1.0505956645909291, 1.0428443131441483,
    1.03504043983344, 1.027181966035645, 1.0192667174654835, 1.011292417439995,
    1.0032566795446725, 0.9951569996350904, 0.986990747099062, 0.9787551552942242,
    0.970447311064224, 0.9620641432230401, 0.9536024098810856, 0.945058684468165,
    0.9364293402865748, 0.9277105334019996, 0.9188981836495902, 0.9099879534967181,
    0.9009752244612214, 0.891855070732941, 0.882622229585165, 0.8732710680888602,
    0.8637955455533084, 0.8541891710081634, 0.8444449549091535, 0.8345553540863817,
    0.8245122087522917, 0.8143066701352148, 0.8039291169899707, 0.7933690588406228,
    0.7826150233072326, 0.7716544242245676, 0.7604734064301076, 0.7490566620178148,
    0.7373872114342951, 0.7254461409099993, 0.7132122851909756, 0.7006618411068146,
    0.6877678927957882, 0.6744998228372936, 0.6608225742444196, 0.6466957148949936,
    0.6320722363860609, 0.6168969900077513, 0.6011046177559926, 0.5846167661063792,
    0.5673382570538187, 0.549151702327165, 0.5299097206615578, 0.5094233296020916,
    0.4874439661392358, 0.46363433679088206, 0.43751840220787164, 0.40838913461199117,
    0.3751213328783808, 0.3357375192144254, 0.2861745917920727, 0.21524189598488214,
    0.0,
];
#[rustfmt::skip]
pub(crate) const ZIG_NORM_F: [f64; 257] = [
    0.0004774677646096729, 0.0012602859304986461, 0.0026090727461022148, 0.004037972593363084,
    0.0055224032992510505, 0.007050875471373285, 0.008616582769398787, 0.010214971439701523,
    0.011842757857907931, 0.013497450601739926, 0.015177088307935365, 0.016880083152543187,
    0.01860512127572467, 0.020351096230044538, 0.022117062707308878, 0.02390220330579588,
    0.02570580400854891, 0.027527235669603113, 0.02936593975813336, 0.0312214171919203,
    0.03309321945857858, 0.034980941461716125, 0.036884215688567305, 0.03880270740452615,
    0.04073611065594094, 0.04268414491647446, 0.044646552251294463, 0.04662309490193038,
    0.04861355321586854, 0.05061772386094778, 0.05263541827679219, 0.05466646132488892,
    0.0567106901062029, 0.05876795292093374, 0.06083810834953988, 0.06292102443775814,
    0.0650165779712429, 0.0671246538277885, 0.06924514439700676, 0.0713779490588904,
    0.07352297371398132, 0.07568013035892718, 0.07784933670209612, 0.08003051581466307,
    0.0822235958132029, 0.08442850957035347, 0.08664519445055807, 0.08887359206827589,
    0.09111364806637376, 0.09336531191269101, 0.095628536713009, 0.09790327903886246,
    0.10018949876881002, 0.10248715894193525, 0.10479622562248707, 0.1071166677746838,
    0.1094484571468118, 0.11179156816383809, 0.11414597782783849, 0.11651166562561087,
    0.11888861344291006, 0.1212768054847903, 0.12367622820159657, 0.1260868702201859,
    0.12850872227999957, 0.13094177717364436, 0.13338602969166916, 0.13584147657125376,
    0.13830811644855073, 0.1407859498144447, 0.14327497897351346, 0.14577520800599403,
    0.14828664273257455, 0.15080929068184568, 0.15334316106026286, 0.1558882647244792,
    0.15844461415592428, 0.161012223437511, 0.16359110823236558, 0.1661812857644819,
    0.16878277480121137, 0.17139559563750584, 0.1740197700818386, 0.17665532144373486,
    0.17930227452284758, 0.18196065559952251, 0.18463049242679927, 0.1873118142238003,
    0.19000465167046499, 0.19270903690358918, 0.1954250035141343, 0.19815258654577514,
    0.2008918224946566, 0.2036427493103349, 0.2064054063978808, 0.20917983462112508,
    0.21196607630703018, 0.21476417525117358, 0.21757417672433113, 0.220396127480152,
    0.22323007576391748, 0.22607607132238028, 0.22893416541468034, 0.23180441082433872,
    0.23468686187233, 0.2375815744312381, 0.2404886059405006, 0.2434080154227503,
    0.24633986350126383, 0.24928421241852852, 0.2522411260559422, 0.25521066995466196,
    0.25819291133761924, 0.2611879191327212, 0.2641957639972612, 0.26721651834356147,
    0.27025025636587546, 0.27329705406857707, 0.2763569892956683, 0.27943014176163794,
    0.2825165930837076, 0.28561642681550176, 0.2887297284821829, 0.2918565856170952,
    0.2949970877999618, 0.2981513266966855, 0.30131939610080305, 0.30450139197665,
    0.30769741250429206, 0.3109075581262865, 0.3141319315963372, 0.3173706380299136,
    0.32062378495690536, 0.3238914823763911, 0.3271738428136014, 0.3304709813791636,
    0.33378301583071845, 0.33711006663700605, 0.34045225704452187, 0.3438097131468507,
    0.34718256395679364, 0.3505709414814061, 0.3539749808000768, 0.3573948201457805,
    0.36083060098964803, 0.36428246812900406, 0.3677505697790326, 0.3712350576682395,
    0.37473608713789114, 0.3782538172456192, 0.38178841087339366, 0.3853400348400773,
    0.3889088600187887, 0.3924950614593156, 0.39609881851583245, 0.3997203149801972,
    0.4033597392211145, 0.40701728432947337, 0.41069314827018816, 0.4143875340408911,
    0.4181006498378482, 0.4218327092294959, 0.42558393133802197, 0.4293545410294414,
    0.43314476911265226, 0.43695485254798555, 0.440785034665804, 0.4446355653957394,
    0.44850670150720306, 0.4523987068618485, 0.45631185267871643, 0.46024641781284287,
    0.46420268904817436, 0.4681809614056936, 0.4721815384677302, 0.47620473271950586,
    0.48025086590904675, 0.4843202694266833, 0.48841328470545803, 0.49253026364386854,
    0.4966715690524897, 0.5008375751261487, 0.5050286679434681, 0.5092452459957479,
    0.513487720747327, 0.5177565172297564, 0.5220520746723218, 0.5263748471716845,
    0.5307253044036621, 0.5351039323804576, 0.5395112342569521, 0.5439477311900263,
    0.5484139632552658, 0.5529104904258323, 0.557437893618766, 0.5619967758145243,
    0.5665877632561644, 0.5712115067352532, 0.5758686829723537, 0.5805599961007909,
    0.5852861792633715, 0.590047996332826, 0.5948462437679874, 0.5996817526191253,
    0.6045553906974678, 0.6094680649257734, 0.6144207238889139, 0.6194143606058343,
    0.6244500155470265, 0.6295287799248367, 0.6346517992876236, 0.6398202774530566,
    0.6450354808208223, 0.6502987431108167, 0.6556114705796973, 0.6609751477766631,
    0.6663913439087501, 0.6718617198970821, 0.6773880362187734, 0.6829721616449947,
    0.6886160830046717, 0.6943219161261166, 0.7000919181365115, 0.7059285013327542,
    0.7118342488782483, 0.7178119326307218, 0.7238645334686301, 0.7299952645614761,
    0.7362075981268625, 0.7425052963401509, 0.7488924472191567, 0.755373506507096,
    0.7619533468367952, 0.768637315798486, 0.775431304981187, 0.7823418326548023,
    0.7893761435660244, 0.7965423304229587, 0.803849483170964, 0.811307874312656,
    0.8189291916037021, 0.8267268339462212, 0.8347162929868832, 0.842915653112204,
    0.8513462584586777, 0.8600336211963313, 0.8690086880368568, 0.8783096558089172,
    0.8879846607558332, 0.8980959218983432, 0.9087264400521305, 0.9199915050393467,
    0.9320600759592301, 0.9451989534422993, 0.9598790918001063, 0.9771017012676712,
    1.0,
];
